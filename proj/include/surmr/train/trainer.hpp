#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surmr/train/evaluate.hpp"

namespace surmr::train {

struct TrainConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 8;
  // Training stops at whichever limit is hit first; 0 steps means none.
  std::size_t max_steps = 1000;
  std::size_t max_epochs = 100;
  model::LossWeights loss;
  bool hflip = true;
  bool vflip = true;
  // Epochs without validation improvement before stopping; 0 disables.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  bool freeze_backbone = false;
  // Kernel threads; 0 runs single-threaded (the reproducibility mode).
  std::size_t workers = 0;
  std::string precision = "double";

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct StepLog {
  std::size_t step = 0;  // 1-based
  std::size_t epoch = 0;
  double loss = 0.0;     // batch mean of the joint loss
  std::vector<std::size_t> batch;
  std::vector<FlipDraw> flips;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double train_loss = 0.0;
  std::optional<double> val_score;
  bool improved = false;
};

struct TrainResult {
  std::size_t steps = 0;
  std::vector<StepLog> step_log;
  std::vector<EpochLog> epoch_log;
  std::optional<double> best_val;
  std::size_t best_step = 0;
  bool early_stopped = false;
};

using StepCallback = std::function<void(const StepLog&)>;

// Adam on the batch-mean joint loss. With a non-empty `val`, the network ends
// holding the parameters with the best validation score (MAE_sur + MAE_smr
// over the enabled terms, measured at step 0 and after every epoch).
TrainResult train_model(model::Network& net, const Dataset& train, const Dataset& val,
                        const TrainConfig& config, const StepCallback& on_step = {});

// Pre-training: targets are (proxy SUR, SMR) as carried by the dataset.
TrainResult pretrain(model::Network& net, const Dataset& train, const Dataset& val, const TrainConfig& config,
                     const StepCallback& on_step = {});

// Fine-tuning from `init` (warm start) or from the network's own
// initialization when `init` is null.
TrainResult finetune(model::Network& net, const model::Network* init, const Dataset& train, const Dataset& val,
                     const TrainConfig& config, const StepCallback& on_step = {});

// Copies parameters from `src`: everything for the same variant, only
// `backbone.*` otherwise. Throws "config mismatch" on incompatible shapes.
void warm_start(model::Network& dst, const model::Network& src);

std::vector<nn::Tensor> snapshot(const nn::ParamList& params);
void restore(const nn::ParamList& params, const std::vector<nn::Tensor>& values);

std::string format_step_log(const std::vector<StepLog>& log);

// Applies `workers` to the kernel thread pool.
void configure_threads(std::size_t workers);

}  // namespace surmr::train
