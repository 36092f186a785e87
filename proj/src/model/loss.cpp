#include "surmr/model/loss.hpp"

#include <cmath>

#include "surmr/error.hpp"

namespace surmr::model {

namespace {

void check_target(const Target& target, const LossWeights& weights) {
  auto check = [](const std::optional<double>& v, const char* name) {
    if (!v) throw Error(std::string("missing ") + name + " target for an unmasked loss term");
    if (!(*v >= 0.0 && *v <= 1.0)) throw Error(std::string(name) + " target outside [0, 1]");
  };
  if (weights.sur_mask) check(target.sur, "SUR");
  if (weights.smr_mask) check(target.smr, "SMR");
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::validate() const {
  if (!sur_mask && !smr_mask) throw Error("loss weights: both SUR and SMR masks are false");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw Error("loss weights must be non-negative");
}

double joint_loss(const Prediction& pred, const Target& target, const LossWeights& weights) {
  weights.validate();
  check_target(target, weights);
  double loss = 0.0;
  if (weights.sur_mask) loss += weights.alpha * std::abs(pred.sur - *target.sur);
  if (weights.smr_mask) loss += weights.beta * std::abs(pred.smr - *target.smr);
  return loss;
}

nn::Var joint_loss(const nn::Var& pred, const Target& target, const LossWeights& weights) {
  weights.validate();
  check_target(target, weights);
  nn::require_shape(pred->value, {1, 2}, "joint_loss prediction");
  // Gradient of the L1 terms is the constant sign vector at this point.
  nn::Tensor coeff({1, 2});
  if (weights.sur_mask) coeff[0] = weights.alpha * sign(pred->value[0] - *target.sur);
  if (weights.smr_mask) coeff[1] = weights.beta * sign(pred->value[1] - *target.smr);
  nn::Var loss = nn::ops::dot_const(pred, coeff);
  // The node's value is the loss itself, not the linearization.
  loss->value[0] = joint_loss(Prediction{pred->value[0], pred->value[1]}, target, weights);
  return loss;
}

double batch_loss(std::span<const Prediction> preds, std::span<const Target> targets,
                  const LossWeights& weights) {
  if (preds.size() != targets.size()) throw Error("batch_loss: prediction/target count mismatch");
  if (preds.empty()) throw Error("batch_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += joint_loss(preds[i], targets[i], weights);
  return total / static_cast<double>(preds.size());
}

}  // namespace surmr::model
