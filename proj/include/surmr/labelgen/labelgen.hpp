#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "surmr/core/quality.hpp"
#include "surmr/io/formats.hpp"

namespace surmr::labelgen {

enum class Polarity { higher_better, lower_better };
enum class Origin { builtin, external };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

struct ScorerDescriptor {
  std::string scorer_id;
  Polarity polarity = Polarity::higher_better;
  Origin origin = Origin::external;
};

struct LabelgenConfig {
  // Ladders whose score range is below this are treated as degenerate.
  double eps_deg = 1e-9;
};

// Raw per-(ladder, rung, scorer) quality scores. Immutable after ingest.
class ScoreTable {
 public:
  using Key = std::tuple<std::string, int, std::string>;

  // Throws "duplicate entry" when the key already exists or on a polarity
  // that disagrees with earlier rows of the same scorer.
  void add(const std::string& ladder_id, int rung_index, const std::string& scorer_id, double score,
           Polarity polarity, Origin origin = Origin::external);

  std::optional<double> get(const std::string& ladder_id, int rung_index,
                            const std::string& scorer_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<Key, double>& entries() const { return entries_; }
  // Scorers in first-seen order.
  const std::vector<ScorerDescriptor>& scorers() const { return scorers_; }
  std::vector<std::string> ladder_ids() const;

  // For every (ladder, scorer) pair present, require the full rung set
  // 1..K of that ladder (K = highest rung index seen for the ladder).
  void validate_complete() const;

  // Scores of one scorer over rungs 1..K of a ladder, in rung order.
  std::vector<double> ladder_scores(const core::QualityLadder& ladder, const std::string& scorer_id) const;

 private:
  std::map<Key, double> entries_;
  std::vector<ScorerDescriptor> scorers_;
};

// Per-(ladder, rung) proxy SUR labels.
struct ProxyLabelSet {
  io::LabelMap labels;
  std::vector<std::string> scorer_ids;
};

// lower_better scores map s -> 1 - s; higher_better pass through.
std::vector<double> canonicalize_polarity(std::span<const double> scores, Polarity polarity);

// (s - min) / (max - min); all 1.0 when max - min < eps_deg.
std::vector<double> normalize_over_ladder(std::span<const double> scores, double eps_deg = 1e-9);

// Mean over scorers of the normalized canonical scores.
ProxyLabelSet proxy_sur(const ScoreTable& table, std::span<const ScorerDescriptor> scorers,
                        const core::QualityLadder& ladder, const LabelgenConfig& config = {});

// Rungs where a scorer's canonical score rises although compression got
// heavier (score[k] > score[k-1]).
struct MonotonicityViolation {
  std::string ladder_id;
  std::string scorer_id;
  int rung_index = 0;
  double previous = 0.0;
  double current = 0.0;
};
std::vector<MonotonicityViolation> monotonicity_report(const ScoreTable& table,
                                                       std::span<const ScorerDescriptor> scorers,
                                                       const core::QualityLadder& ladder);

// Score table file: ladder_id,rung_index,scorer_id,score,polarity
ScoreTable ingest_external_scores(const std::filesystem::path& path);
std::string format_score_table(const ScoreTable& table);

}  // namespace surmr::labelgen
