#pragma once

#include <optional>
#include <span>

#include "surmr/model/network.hpp"

namespace surmr::model {

struct LossWeights {
  double alpha = 0.5;
  double beta = 0.5;
  bool sur_mask = true;
  bool smr_mask = true;

  void validate() const;
};

// Ground truth for one item; a masked-out target may be absent.
struct Target {
  std::optional<double> sur;
  std::optional<double> smr;
};

// alpha*|pred.sur - sur|*[sur_mask] + beta*|pred.smr - smr|*[smr_mask]
double joint_loss(const Prediction& pred, const Target& target, const LossWeights& weights);

// Differentiable form over a (1, 2) prediction node. The subgradient of
// |x| at 0 is taken as 0.
nn::Var joint_loss(const nn::Var& pred, const Target& target, const LossWeights& weights);

// Mean of joint_loss over a batch.
double batch_loss(std::span<const Prediction> preds, std::span<const Target> targets,
                  const LossWeights& weights);

}  // namespace surmr::model
