#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surmr/train/dataset.hpp"

namespace surmr::train {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct ItemPrediction {
  std::string ladder_id;
  int rung_index = 0;
  model::Prediction pred;
  model::Target target;
};

struct SplitMetrics {
  std::string split;
  std::size_t count = 0;
  // Absent when no item of the split carries that label.
  std::optional<double> mae_sur;
  std::optional<double> mae_smr;
  std::vector<ItemPrediction> predictions;

  // mae_sur + mae_smr over the terms enabled by the masks.
  double combined(bool sur = true, bool smr = true) const;
};

// MAE over every rung in `data`. Throws on an empty split.
SplitMetrics evaluate(const model::Network& net, const Dataset& data, const std::string& split_name);
// Same reduction over precomputed predictions.
SplitMetrics summarize(std::vector<ItemPrediction> predictions, const std::string& split_name);

struct MetricsReport {
  std::string variant;
  std::string dataset;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::string config_hash;
  nlohmann::json config;
  std::vector<SplitMetrics> splits;

  const SplitMetrics* find(const std::string& split) const;
};

// FNV-1a over the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

nlohmann::json report_to_json(const MetricsReport& report, bool with_predictions = true);
// variant,dataset,split,mae_sur,mae_smr,seed,steps
std::string format_summary(const std::vector<MetricsReport>& reports);

}  // namespace surmr::train
