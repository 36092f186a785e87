#include <gtest/gtest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "surmr/core/quality.hpp"
#include "surmr/error.hpp"

using namespace surmr;
using core::Ratio;
using core::RatioKind;
using core::SatisfactionRecord;
using core::SubjectKind;
using test::make_ladder;

namespace {

std::vector<SatisfactionRecord> rung_records(int n, int satisfied, SubjectKind kind = SubjectKind::human) {
  std::vector<SatisfactionRecord> v;
  for (int i = 0; i < n; ++i) v.push_back({"a", 1, "s" + std::to_string(i), kind, i < satisfied});
  return v;
}

// Independent counter: walks every record for every rung.
std::map<int, std::pair<std::size_t, std::size_t>> brute_force(const std::vector<SatisfactionRecord>& recs, int k,
                                                              SubjectKind kind) {
  std::map<int, std::pair<std::size_t, std::size_t>> out;
  for (int r = 1; r <= k; ++r) {
    std::size_t yes = 0, all = 0;
    for (const auto& rec : recs) {
      if (rec.rung_index == r && rec.subject_kind == kind) {
        ++all;
        if (rec.satisfied) ++yes;
      }
    }
    out[r] = {yes, all};
  }
  return out;
}

}  // namespace

TEST(SatisfactionRatio, CountExamples) {
  EXPECT_DOUBLE_EQ(core::satisfaction_ratio(rung_records(5, 3)).value(), 0.6);
  EXPECT_EQ(core::satisfaction_ratio(rung_records(5, 3)), (Ratio{3, 5}));
  EXPECT_EQ(core::satisfaction_ratio(rung_records(4, 4)).value(), 1.0);
  EXPECT_EQ(core::satisfaction_ratio(rung_records(10, 0)).value(), 0.0);
}

TEST(SatisfactionRatio, Errors) {
  std::vector<SatisfactionRecord> none;
  EXPECT_THROW(
      {
        try {
          core::satisfaction_ratio(none);
        } catch (const Error& e) {
          EXPECT_NE(std::string(e.what()).find("empty population"), std::string::npos);
          throw;
        }
      },
      Error);
  auto mixed = rung_records(3, 1);
  mixed[1].subject_kind = SubjectKind::machine;
  try {
    core::satisfaction_ratio(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mixed population"), std::string::npos);
  }
}

TEST(RatioCurve, TwoSubjectsThreeRungs) {
  const auto l = make_ladder("a", 3);
  std::vector<SatisfactionRecord> recs;
  for (int r = 1; r <= 3; ++r) {
    recs.push_back({"a", r, "A", SubjectKind::human, r <= 2});
    recs.push_back({"a", r, "B", SubjectKind::human, r <= 1});
  }
  const auto c = core::ratio_curve(l, recs, RatioKind::SUR);
  ASSERT_EQ(c.values.size(), 3u);
  EXPECT_EQ(c.values[0].ratio.value(), 1.0);
  EXPECT_EQ(c.values[1].ratio.value(), 0.5);
  EXPECT_EQ(c.values[2].ratio.value(), 0.0);
  EXPECT_EQ(c.population_size, 2u);
}

TEST(RatioCurve, SingleSubjectAllSatisfied) {
  const auto l = make_ladder("a", 2);
  std::vector<SatisfactionRecord> recs{{"a", 1, "x", SubjectKind::human, true},
                                       {"a", 2, "x", SubjectKind::human, true}};
  const auto c = core::ratio_curve(l, recs, RatioKind::SUR);
  EXPECT_EQ(c.values[0].ratio.value(), 1.0);
  EXPECT_EQ(c.values[1].ratio.value(), 1.0);
}

TEST(RatioCurve, MissingRungNamesIt) {
  const auto l = make_ladder("a", 2);
  std::vector<SatisfactionRecord> recs{{"a", 1, "x", SubjectKind::human, true}};
  try {
    core::ratio_curve(l, recs, RatioKind::SUR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("rung 2"), std::string::npos) << e.what();
  }
}

TEST(RatioCurve, RaggedPopulation) {
  const auto l = make_ladder("a", 2);
  std::vector<SatisfactionRecord> recs{{"a", 1, "x", SubjectKind::human, true},
                                       {"a", 1, "y", SubjectKind::human, true},
                                       {"a", 2, "x", SubjectKind::human, false}};
  try {
    core::ratio_curve(l, recs, RatioKind::SUR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ragged population"), std::string::npos);
  }
}

TEST(RatioCurve, WrongKindIsMixedPopulation) {
  const auto l = make_ladder("a", 1);
  std::vector<SatisfactionRecord> recs{{"a", 1, "m", SubjectKind::machine, true}};
  try {
    core::ratio_curve(l, recs, RatioKind::SUR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mixed population"), std::string::npos);
  }
  EXPECT_EQ(core::ratio_curve(l, recs, RatioKind::SMR).values[0].ratio.value(), 1.0);
}

TEST(RatioCurve, DuplicateRecordRejected) {
  const auto l = make_ladder("a", 1);
  std::vector<SatisfactionRecord> recs{{"a", 1, "x", SubjectKind::human, true},
                                       {"a", 1, "x", SubjectKind::human, false}};
  EXPECT_THROW(core::ratio_curve(l, recs, RatioKind::SUR), Error);
}

TEST(RatioCurve, MatchesBruteForceAndIsRational) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 10);
    const int pop = 1 + static_cast<int>(rng() % 50);
    const auto kind = rng() % 2 ? SubjectKind::human : SubjectKind::machine;
    const auto l = make_ladder("a", k);
    std::vector<SatisfactionRecord> recs;
    for (int s = 0; s < pop; ++s)
      for (int r = 1; r <= k; ++r) recs.push_back({"a", r, "s" + std::to_string(s), kind, (rng() & 1) != 0});
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto c = core::ratio_curve(l, recs, kind == SubjectKind::human ? RatioKind::SUR : RatioKind::SMR);
    const auto oracle = brute_force(recs, k, kind);
    ASSERT_EQ(c.population_size, static_cast<std::size_t>(pop));
    for (const auto& p : c.values) {
      EXPECT_EQ(p.ratio.satisfied, oracle.at(p.rung_index).first);
      EXPECT_EQ(p.ratio.total, oracle.at(p.rung_index).second);
      // Multiple of 1/population_size, checked on the exact counts.
      EXPECT_EQ(p.ratio.total, c.population_size);
      EXPECT_GE(p.ratio.value(), 0.0);
      EXPECT_LE(p.ratio.value(), 1.0);
    }
  }
}

TEST(QualityLadder, ValidationRejectsBadLadders) {
  auto l = make_ladder("a", 3);
  auto gap = l;
  gap.rungs.erase(gap.rungs.begin() + 1);
  EXPECT_THROW(gap.normalize_and_validate(), Error);
  auto q = l;
  q.rungs[2].q_param = q.rungs[1].q_param;
  EXPECT_THROW(q.normalize_and_validate(), Error);
  auto same = l;
  same.original_ref = same.rungs[0].image_ref;
  EXPECT_THROW(same.normalize_and_validate(), Error);
  core::QualityLadder empty;
  empty.ladder_id = "e";
  empty.original_ref = "o";
  EXPECT_THROW(empty.normalize_and_validate(), Error);
  // Unordered input is sorted by rung index first.
  auto shuffled = l;
  std::swap(shuffled.rungs[0], shuffled.rungs[2]);
  EXPECT_NO_THROW(shuffled.normalize_and_validate());
  EXPECT_EQ(shuffled.rungs[0].rung_index, 1);
}

TEST(SimulateMachines, ThresholdsWithoutNoise) {
  const auto l = make_ladder("a", 4);
  core::MachinePopulationSpec spec{{2, 4}, 0.0};
  const auto recs = core::simulate_machine_population(l, spec, 1);
  ASSERT_EQ(recs.size(), 8u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.subject_kind, SubjectKind::machine);
    const int t = r.subject_id == "machine_1" ? 2 : 4;
    EXPECT_EQ(r.satisfied, r.rung_index <= t) << r.subject_id << " rung " << r.rung_index;
  }
}

TEST(SimulateMachines, ZeroThresholdNeverSatisfied) {
  const auto recs = core::simulate_machine_population(make_ladder("a", 3), {{0}, 0.0}, 9);
  for (const auto& r : recs) EXPECT_FALSE(r.satisfied);
}

TEST(SimulateMachines, DeterministicPerSeed) {
  const auto l = make_ladder("a", 4);
  core::MachinePopulationSpec spec{{0, 1, 2, 3, 4}, 0.2};
  const auto a = core::simulate_machine_population(l, spec, 7);
  const auto b = core::simulate_machine_population(l, spec, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].subject_id, b[i].subject_id);
    EXPECT_EQ(a[i].rung_index, b[i].rung_index);
    EXPECT_EQ(a[i].satisfied, b[i].satisfied);
  }
}

TEST(SimulateMachines, ThresholdOutOfRange) {
  const auto l = make_ladder("a", 3);
  EXPECT_THROW(core::simulate_machine_population(l, {{4}, 0.0}, 0), Error);
  EXPECT_THROW(core::simulate_machine_population(l, {{-1}, 0.0}, 0), Error);
}

TEST(SimulateMachines, NoiselessCurvesAreMonotone) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 10);
    core::MachinePopulationSpec spec;
    for (int m = 0; m < 1 + static_cast<int>(rng() % 20); ++m) spec.thresholds.push_back(static_cast<int>(rng() % (k + 1)));
    const auto l = make_ladder("a", k);
    const auto c = core::ratio_curve(l, core::simulate_machine_population(l, spec, rng()), RatioKind::SMR);
    for (std::size_t i = 1; i < c.values.size(); ++i) {
      EXPECT_LE(c.values[i].ratio.satisfied, c.values[i - 1].ratio.satisfied);
    }
  }
}

TEST(DeriveSeed, StableAndKeySensitive) {
  EXPECT_EQ(core::derive_seed(1, "a"), core::derive_seed(1, "a"));
  EXPECT_NE(core::derive_seed(1, "a"), core::derive_seed(1, "b"));
  EXPECT_NE(core::derive_seed(1, "a"), core::derive_seed(2, "a"));
}
