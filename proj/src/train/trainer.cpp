#include "surmr/train/trainer.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <omp.h>

#include "surmr/core/quality.hpp"
#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error("adam moment coefficients must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw Error("adam_eps must be positive");
  if (precision != "double") {
    throw Error("unsupported precision '" + precision + "' (only double is implemented)");
  }
  loss.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"batch_size", c.batch_size},
                     {"max_steps", c.max_steps},
                     {"max_epochs", c.max_epochs},
                     {"alpha", c.loss.alpha},
                     {"beta", c.loss.beta},
                     {"sur_mask", c.loss.sur_mask},
                     {"smr_mask", c.loss.smr_mask},
                     {"hflip", c.hflip},
                     {"vflip", c.vflip},
                     {"patience", c.patience},
                     {"seed", c.seed},
                     {"freeze_backbone", c.freeze_backbone},
                     {"workers", c.workers},
                     {"precision", c.precision}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.max_steps = j.value("max_steps", d.max_steps);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.loss.alpha = j.value("alpha", d.loss.alpha);
  c.loss.beta = j.value("beta", d.loss.beta);
  c.loss.sur_mask = j.value("sur_mask", d.loss.sur_mask);
  c.loss.smr_mask = j.value("smr_mask", d.loss.smr_mask);
  c.hflip = j.value("hflip", d.hflip);
  c.vflip = j.value("vflip", d.vflip);
  c.patience = j.value("patience", d.patience);
  c.seed = j.value("seed", d.seed);
  c.freeze_backbone = j.value("freeze_backbone", d.freeze_backbone);
  c.workers = j.value("workers", d.workers);
  c.precision = j.value("precision", d.precision);
}

void configure_threads(std::size_t workers) { omp_set_num_threads(workers == 0 ? 1 : static_cast<int>(workers)); }

std::vector<nn::Tensor> snapshot(const nn::ParamList& params) {
  std::vector<nn::Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.var->value);
  return out;
}

void restore(const nn::ParamList& params, const std::vector<nn::Tensor>& values) {
  if (values.size() != params.size()) throw Error("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i].var->value = values[i];
}

void warm_start(model::Network& dst, const model::Network& src) {
  const bool same = dst.config().variant == src.config().variant;
  std::size_t copied = 0;
  for (const auto& p : dst.parameters()) {
    if (!same && p.name.rfind("backbone.", 0) != 0) continue;
    const auto other = src.find(p.name);
    if (!other || other->value.shape() != p.var->value.shape()) {
      throw Error("config mismatch: warm-start source lacks a compatible '" + p.name + "'");
    }
    p.var->value = other->value;
    ++copied;
  }
  if (copied == 0) throw Error("config mismatch: nothing to copy from the warm-start network");
}

namespace {

struct Adam {
  std::vector<nn::Tensor> m, v;
  std::size_t t = 0;
};

void check_targets(const Dataset& data, const model::LossWeights& w, const std::string& what) {
  for (const auto& it : data.items) {
    if ((w.sur_mask && !it.target.sur) || (w.smr_mask && !it.target.smr)) {
      throw Error(what + " item (ladder '" + it.ladder_id + "', rung " + std::to_string(it.rung_index) +
                  ") lacks a label required by the loss masks");
    }
  }
}

}  // namespace

TrainResult train_model(model::Network& net, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                        const StepCallback& on_step) {
  cfg.validate();
  if (train.empty() && cfg.max_steps > 0 && cfg.max_epochs > 0) throw Error("training split is empty");
  check_targets(train, cfg.loss, "training");
  configure_threads(cfg.workers);

  const auto& params = net.parameters();
  std::vector<bool> trainable(params.size(), true);
  if (cfg.freeze_backbone) {
    for (std::size_t i = 0; i < params.size(); ++i) trainable[i] = params[i].name.rfind("backbone.", 0) != 0;
  }
  Adam adam;
  for (const auto& p : params) {
    adam.m.push_back(nn::Tensor::zeros_like(p.var->value));
    adam.v.push_back(nn::Tensor::zeros_like(p.var->value));
  }

  TrainResult result;
  std::vector<nn::Tensor> best;
  const auto validate_now = [&](EpochLog& log) {
    if (val.empty()) return;
    const double score = evaluate(net, val, "val").combined(cfg.loss.sur_mask, cfg.loss.smr_mask);
    log.val_score = score;
    if (!result.best_val || score < *result.best_val) {
      result.best_val = score;
      result.best_step = result.steps;
      best = snapshot(params);
      log.improved = true;
    }
  };
  {
    EpochLog init;
    validate_now(init);
    if (init.val_score) result.epoch_log.push_back(init);
  }

  const std::size_t n = train.size();
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs && result.steps < cfg.max_steps; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(core::derive_seed(cfg.seed, "epoch/" + std::to_string(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);

    CompensatedSum epoch_loss;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < n && result.steps < cfg.max_steps; start += cfg.batch_size) {
      const std::size_t step = result.steps + 1;
      StepLog log;
      log.step = step;
      log.epoch = epoch;
      nn::zero_grads(params);
      CompensatedSum loss_sum;
      const std::size_t end = std::min(n, start + cfg.batch_size);
      // Short final batches keep the 1/B weight of a full batch so every
      // item contributes equally across the epoch.
      for (std::size_t pos = start; pos < end; ++pos) {
        const Item& it = train.items[order[pos]];
        std::mt19937_64 aug_rng(core::derive_seed(cfg.seed, "aug/" + std::to_string(step) + "/" + std::to_string(pos - start)));
        const FlipDraw draw = draw_flip(aug_rng, cfg.hflip, cfg.vflip);
        auto [a, b] = augment(*it.original, *it.compressed, draw);
        auto out = net.forward(nn::constant(std::move(a)), nn::constant(std::move(b)));
        auto loss = model::joint_loss(out, it.target, cfg.loss);
        const double value = loss->value.data()[0];
        if (!std::isfinite(value)) {
          throw Error("non-finite loss at step " + std::to_string(step) + " (ladder '" + it.ladder_id + "', rung " +
                      std::to_string(it.rung_index) + ")");
        }
        loss_sum.add(value);
        nn::backward(nn::ops::scale(loss, inv_b));
        log.batch.push_back(order[pos]);
        log.flips.push_back(draw);
      }
      log.loss = loss_sum.value() / static_cast<double>(end - start);

      ++adam.t;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (!trainable[i]) continue;
        auto& node = *params[i].var;
        if (node.grad.size() == 0) continue;
        double* w = node.value.data();
        const double* g = node.grad.data();
        double* m = adam.m[i].data();
        double* v = adam.v[i].data();
        for (std::size_t k = 0; k < node.value.size(); ++k) {
          m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g[k];
          v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g[k] * g[k];
          w[k] -= cfg.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg.adam_eps);
        }
      }
      result.steps = step;
      epoch_loss.add(log.loss);
      ++epoch_steps;
      if (on_step) on_step(log);
      result.step_log.push_back(std::move(log));
    }

    EpochLog elog;
    elog.epoch = epoch;
    elog.step = result.steps;
    elog.train_loss = epoch_steps ? epoch_loss.value() / static_cast<double>(epoch_steps) : 0.0;
    validate_now(elog);
    result.epoch_log.push_back(elog);
    if (elog.val_score) {
      stale = elog.improved ? 0 : stale + 1;
      if (cfg.patience > 0 && stale >= cfg.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  nn::zero_grads(params);
  if (!best.empty()) restore(params, best);
  return result;
}

TrainResult pretrain(model::Network& net, const Dataset& train, const Dataset& val, const TrainConfig& config,
                     const StepCallback& on_step) {
  return train_model(net, train, val, config, on_step);
}

TrainResult finetune(model::Network& net, const model::Network* init, const Dataset& train, const Dataset& val,
                     const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  if (init) warm_start(net, *init);
  return train_model(net, train, val, config, on_step);
}

std::string format_step_log(const std::vector<StepLog>& log) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"step", "epoch", "loss"});
  for (const auto& s : log) w.row({std::to_string(s.step), std::to_string(s.epoch), io::format_real(s.loss)});
  return ss.str();
}

}  // namespace surmr::train
