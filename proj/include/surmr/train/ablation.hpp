#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "surmr/train/trainer.hpp"

namespace surmr::train {

struct AblationDataset {
  std::string name;
  Dataset train;
  Dataset val;
  Dataset test;
};

struct AblationRow {
  std::string variant;
  std::string dataset;
  std::string split;  // split the metrics were measured on
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::optional<double> mae_sur;
  std::optional<double> mae_smr;
  std::size_t parameters = 0;
  std::string error;  // empty when the run succeeded
  MetricsReport report;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  bool ok() const;
};

// One train -> evaluate run per (variant, dataset), every run initialized and
// trained with `config.seed`. Metrics come from the test split, falling back
// to val, then train, when a split is empty. A failing run is recorded in its
// row and the remaining runs still execute.
AblationTable run_ablation_matrix(const std::vector<model::Variant>& variants,
                                  const std::vector<AblationDataset>& datasets, const model::NetworkConfig& base,
                                  const TrainConfig& config,
                                  const std::function<void(const AblationRow&)>& on_row = {});

// variant,dataset,split,mae_sur,mae_smr,parameters,seed,steps,status
std::string format_ablation_table(const AblationTable& table);

}  // namespace surmr::train
