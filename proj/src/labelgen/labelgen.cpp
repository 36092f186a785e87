#include "surmr/labelgen/labelgen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::labelgen {

std::string_view to_string(Polarity p) {
  return p == Polarity::higher_better ? "higher_better" : "lower_better";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "higher_better") return Polarity::higher_better;
  if (s == "lower_better") return Polarity::lower_better;
  throw Error("unknown polarity '" + std::string(s) + "' (expected higher_better or lower_better)");
}

void ScoreTable::add(const std::string& ladder_id, int rung_index, const std::string& scorer_id,
                     double score, Polarity polarity, Origin origin) {
  auto it = std::find_if(scorers_.begin(), scorers_.end(),
                         [&](const ScorerDescriptor& d) { return d.scorer_id == scorer_id; });
  if (it == scorers_.end()) {
    scorers_.push_back({scorer_id, polarity, origin});
  } else if (it->polarity != polarity) {
    throw Error("scorer '" + scorer_id + "' declared with conflicting polarities");
  }
  if (!entries_.emplace(Key{ladder_id, rung_index, scorer_id}, score).second) {
    throw Error("duplicate entry for (" + ladder_id + ", " + std::to_string(rung_index) + ", " + scorer_id + ")");
  }
}

std::optional<double> ScoreTable::get(const std::string& ladder_id, int rung_index,
                                      const std::string& scorer_id) const {
  auto it = entries_.find(Key{ladder_id, rung_index, scorer_id});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ScoreTable::ladder_ids() const {
  std::vector<std::string> ids;
  for (const auto& [key, v] : entries_) {
    if (ids.empty() || ids.back() != std::get<0>(key)) ids.push_back(std::get<0>(key));
  }
  return ids;
}

void ScoreTable::validate_complete() const {
  std::map<std::string, int> max_rung;
  std::map<std::pair<std::string, std::string>, std::set<int>> seen;
  for (const auto& [key, v] : entries_) {
    const auto& [ladder, rung, scorer] = key;
    if (rung < 1) throw Error("score table: rung_index must be >= 1 (ladder '" + ladder + "')");
    max_rung[ladder] = std::max(max_rung[ladder], rung);
    seen[{ladder, scorer}].insert(rung);
  }
  for (const auto& [pair, rungs] : seen) {
    const int k = max_rung[pair.first];
    for (int r = 1; r <= k; ++r) {
      if (!rungs.count(r)) {
        throw Error("incomplete ladder coverage: missing score for (ladder '" + pair.first + "', rung " +
                    std::to_string(r) + ", scorer '" + pair.second + "')");
      }
    }
  }
}

std::vector<double> ScoreTable::ladder_scores(const core::QualityLadder& ladder,
                                              const std::string& scorer_id) const {
  std::vector<double> out;
  out.reserve(ladder.size());
  for (const auto& r : ladder.rungs) {
    auto v = get(ladder.ladder_id, r.rung_index, scorer_id);
    if (!v) {
      throw Error("missing score for (ladder '" + ladder.ladder_id + "', rung " + std::to_string(r.rung_index) +
                  ", scorer '" + scorer_id + "')");
    }
    out.push_back(*v);
  }
  return out;
}

std::vector<double> canonicalize_polarity(std::span<const double> scores, Polarity polarity) {
  std::vector<double> out(scores.begin(), scores.end());
  if (polarity == Polarity::lower_better)
    for (auto& s : out) s = 1.0 - s;
  return out;
}

std::vector<double> normalize_over_ladder(std::span<const double> scores, double eps_deg) {
  if (scores.empty()) throw Error("normalize_over_ladder: empty score list");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double mn = *lo, range = *hi - *lo;
  std::vector<double> out(scores.size(), 1.0);
  if (range < eps_deg) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - mn) / range;
  return out;
}

ProxyLabelSet proxy_sur(const ScoreTable& table, std::span<const ScorerDescriptor> scorers,
                        const core::QualityLadder& ladder, const LabelgenConfig& config) {
  if (scorers.empty()) throw Error("proxy_sur: no scorers (N = 0)");
  std::vector<double> sum(ladder.size(), 0.0);
  ProxyLabelSet out;
  for (const auto& sc : scorers) {
    const auto raw = table.ladder_scores(ladder, sc.scorer_id);
    const auto norm = normalize_over_ladder(canonicalize_polarity(raw, sc.polarity), config.eps_deg);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += norm[i];
    out.scorer_ids.push_back(sc.scorer_id);
  }
  const double n = static_cast<double>(scorers.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    out.labels[{ladder.ladder_id, ladder.rungs[i].rung_index}] = sum[i] / n;
  }
  return out;
}

std::vector<MonotonicityViolation> monotonicity_report(const ScoreTable& table,
                                                       std::span<const ScorerDescriptor> scorers,
                                                       const core::QualityLadder& ladder) {
  std::vector<MonotonicityViolation> out;
  for (const auto& sc : scorers) {
    const auto canon = canonicalize_polarity(table.ladder_scores(ladder, sc.scorer_id), sc.polarity);
    for (std::size_t i = 1; i < canon.size(); ++i) {
      if (canon[i] > canon[i - 1]) {
        out.push_back({ladder.ladder_id, sc.scorer_id, ladder.rungs[i].rung_index, canon[i - 1], canon[i]});
      }
    }
  }
  return out;
}

ScoreTable ingest_external_scores(const std::filesystem::path& path) {
  const auto t = io::CsvTable::read(path, {"ladder_id", "rung_index", "scorer_id", "score", "polarity"});
  ScoreTable table;
  for (const auto& row : t.rows()) {
    const auto rung = static_cast<int>(t.integer(row, "rung_index"));
    const double score = t.number(row, "score");
    Polarity pol{};
    try {
      pol = parse_polarity(t.field(row, "polarity"));
      table.add(t.field(row, "ladder_id"), rung, t.field(row, "scorer_id"), score, pol);
    } catch (const Error& e) {
      t.fail(row, e.what());
    }
  }
  table.validate_complete();
  return table;
}

std::string format_score_table(const ScoreTable& table) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"ladder_id", "rung_index", "scorer_id", "score", "polarity"});
  std::map<std::string, Polarity> pol;
  for (const auto& d : table.scorers()) pol[d.scorer_id] = d.polarity;
  for (const auto& [key, v] : table.entries()) {
    const auto& [ladder, rung, scorer] = key;
    w.row({ladder, std::to_string(rung), scorer, io::format_real(v), std::string(to_string(pol[scorer]))});
  }
  return ss.str();
}

}  // namespace surmr::labelgen
