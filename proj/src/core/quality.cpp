#include "surmr/core/quality.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "surmr/error.hpp"

namespace surmr::core {

void QualityLadder::normalize_and_validate() {
  std::sort(rungs.begin(), rungs.end(),
            [](const Rung& a, const Rung& b) { return a.rung_index < b.rung_index; });
  validate();
}

void QualityLadder::validate() const {
  if (ladder_id.empty()) throw Error("ladder has an empty ladder_id");
  if (rungs.empty()) throw Error("ladder '" + ladder_id + "' has no rungs");
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    const Rung& r = rungs[i];
    if (r.rung_index != static_cast<int>(i) + 1) {
      throw Error("ladder '" + ladder_id + "': rung indices must be 1..K without gaps (found " +
                  std::to_string(r.rung_index) + " at position " + std::to_string(i + 1) + ")");
    }
    if (i > 0 && r.q_param <= rungs[i - 1].q_param) {
      throw Error("ladder '" + ladder_id + "': q_param must increase strictly with rung_index (rung " +
                  std::to_string(r.rung_index) + ")");
    }
    if (r.image_ref == original_ref) {
      throw Error("ladder '" + ladder_id + "': rung " + std::to_string(r.rung_index) +
                  " reuses the original image");
    }
  }
}

const Rung& QualityLadder::rung(int rung_index) const {
  if (rung_index < 1 || rung_index > static_cast<int>(rungs.size())) {
    throw Error("ladder '" + ladder_id + "' has no rung " + std::to_string(rung_index));
  }
  return rungs[static_cast<std::size_t>(rung_index - 1)];
}

std::string_view to_string(SubjectKind k) { return k == SubjectKind::human ? "human" : "machine"; }

SubjectKind parse_subject_kind(std::string_view s) {
  if (s == "human") return SubjectKind::human;
  if (s == "machine") return SubjectKind::machine;
  throw Error("unknown subject_kind '" + std::string(s) + "'");
}

std::string_view to_string(RatioKind k) { return k == RatioKind::SUR ? "SUR" : "SMR"; }

RatioKind parse_ratio_kind(std::string_view s) {
  if (s == "SUR" || s == "sur") return RatioKind::SUR;
  if (s == "SMR" || s == "smr") return RatioKind::SMR;
  throw Error("unknown ratio kind '" + std::string(s) + "' (expected SUR or SMR)");
}

SubjectKind subject_kind_for(RatioKind k) {
  return k == RatioKind::SUR ? SubjectKind::human : SubjectKind::machine;
}

Ratio satisfaction_ratio(std::span<const SatisfactionRecord> records) {
  if (records.empty()) throw Error("empty population");
  const auto& first = records.front();
  Ratio r;
  for (const auto& rec : records) {
    if (rec.subject_kind != first.subject_kind) throw Error("mixed population");
    if (rec.ladder_id != first.ladder_id || rec.rung_index != first.rung_index) {
      throw Error("satisfaction_ratio: records span more than one rung");
    }
    r.satisfied += rec.satisfied ? 1 : 0;
    ++r.total;
  }
  return r;
}

RatioCurve ratio_curve(const QualityLadder& ladder, std::span<const SatisfactionRecord> records,
                       RatioKind kind) {
  const SubjectKind wanted = subject_kind_for(kind);
  const std::size_t k = ladder.size();
  std::vector<std::vector<SatisfactionRecord>> per_rung(k);
  std::vector<std::set<std::string>> subjects(k);
  std::size_t other_kind = 0;
  for (const auto& rec : records) {
    if (rec.ladder_id != ladder.ladder_id) continue;
    if (rec.subject_kind != wanted) {
      ++other_kind;
      continue;
    }
    if (rec.rung_index < 1 || rec.rung_index > static_cast<int>(k)) {
      throw Error("ladder '" + ladder.ladder_id + "': record for unknown rung " +
                  std::to_string(rec.rung_index));
    }
    const auto idx = static_cast<std::size_t>(rec.rung_index - 1);
    if (!subjects[idx].insert(rec.subject_id).second) {
      throw Error("duplicate record for ladder '" + ladder.ladder_id + "', rung " +
                  std::to_string(rec.rung_index) + ", subject '" + rec.subject_id + "'");
    }
    per_rung[idx].push_back(rec);
  }

  const bool none = std::all_of(per_rung.begin(), per_rung.end(),
                                [](const auto& v) { return v.empty(); });
  if (none && other_kind > 0) {
    throw Error("mixed population: ladder '" + ladder.ladder_id + "' has only " +
                std::string(to_string(wanted == SubjectKind::human ? SubjectKind::machine
                                                                   : SubjectKind::human)) +
                " records but " + std::string(to_string(kind)) + " was requested");
  }

  RatioCurve curve;
  curve.ladder_id = ladder.ladder_id;
  curve.kind = kind;
  for (std::size_t i = 0; i < k; ++i) {
    if (per_rung[i].empty()) {
      throw Error("ladder '" + ladder.ladder_id + "': rung " + std::to_string(i + 1) + " has no " +
                  std::string(to_string(wanted)) + " records");
    }
    if (subjects[i] != subjects[0]) throw Error("ragged population in ladder '" + ladder.ladder_id + "'");
    curve.values.push_back({static_cast<int>(i) + 1, satisfaction_ratio(per_rung[i])});
  }
  curve.population_size = subjects[0].size();
  return curve;
}

std::vector<SatisfactionRecord> simulate_machine_population(const QualityLadder& ladder,
                                                            const MachinePopulationSpec& spec,
                                                            std::uint64_t seed) {
  const int k = static_cast<int>(ladder.size());
  for (int t : spec.thresholds) {
    if (t < 0 || t > k) {
      throw Error("machine threshold " + std::to_string(t) + " outside [0, " + std::to_string(k) + "]");
    }
  }
  if (!(spec.flip_rate >= 0.0 && spec.flip_rate <= 1.0)) throw Error("flip rate must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(spec.flip_rate);
  std::vector<SatisfactionRecord> out;
  out.reserve(spec.thresholds.size() * ladder.size());
  for (std::size_t m = 0; m < spec.thresholds.size(); ++m) {
    for (int r = 1; r <= k; ++r) {
      bool sat = r <= spec.thresholds[m];
      if (spec.flip_rate > 0.0 && flip(rng)) sat = !sat;
      out.push_back({ladder.ladder_id, r, "machine_" + std::to_string(m + 1), SubjectKind::machine, sat});
    }
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  for (unsigned char c : key) h = mix(h ^ c);
  return h;
}

}  // namespace surmr::core
