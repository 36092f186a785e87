#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace surmr::core {

struct Rung {
  int rung_index = 0;
  long long q_param = 0;
  std::string image_ref;
};

// One original image and its compressed rungs, ordered by rung_index with
// strictly increasing compression parameter.
struct QualityLadder {
  std::string ladder_id;
  std::string original_ref;
  std::string codec_tag;
  std::vector<Rung> rungs;

  std::size_t size() const { return rungs.size(); }
  // Sorts rungs by index, then enforces 1..K without gaps, strictly
  // increasing q_param and an original distinct from every rung image.
  void normalize_and_validate();
  void validate() const;
  const Rung& rung(int rung_index) const;
};

enum class SubjectKind { human, machine };
std::string_view to_string(SubjectKind k);
SubjectKind parse_subject_kind(std::string_view s);

struct SatisfactionRecord {
  std::string ladder_id;
  int rung_index = 0;
  std::string subject_id;
  SubjectKind subject_kind = SubjectKind::human;
  bool satisfied = false;
};

// Exact satisfied/total counts; materialized as a real on demand.
struct Ratio {
  std::size_t satisfied = 0;
  std::size_t total = 0;
  double value() const { return static_cast<double>(satisfied) / static_cast<double>(total); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

enum class RatioKind { SUR, SMR };
std::string_view to_string(RatioKind k);
RatioKind parse_ratio_kind(std::string_view s);
SubjectKind subject_kind_for(RatioKind k);

struct RatioPoint {
  int rung_index = 0;
  Ratio ratio;
};

struct RatioCurve {
  std::string ladder_id;
  RatioKind kind = RatioKind::SUR;
  std::vector<RatioPoint> values;
  std::size_t population_size = 0;
};

// Fraction of satisfied subjects among records that all describe one rung
// and one subject kind.
Ratio satisfaction_ratio(std::span<const SatisfactionRecord> records);

// Per-rung ratios for `ladder` using only records of the requested kind.
// Every subject must judge every rung.
RatioCurve ratio_curve(const QualityLadder& ladder, std::span<const SatisfactionRecord> records,
                       RatioKind kind);

struct MachinePopulationSpec {
  // Machine m is satisfied at rung k iff k <= thresholds[m]; each in [0, K].
  std::vector<int> thresholds;
  // Probability of independently flipping each verdict.
  double flip_rate = 0.0;
};

// Deterministic for a fixed seed. Subject ids are "machine_<m>" (1-based).
std::vector<SatisfactionRecord> simulate_machine_population(const QualityLadder& ladder,
                                                            const MachinePopulationSpec& spec,
                                                            std::uint64_t seed);

// Stable per-key seed derivation (SplitMix64 over the key bytes).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace surmr::core
