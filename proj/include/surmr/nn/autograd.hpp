#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "surmr/nn/tensor.hpp"

namespace surmr::nn {

// One value in a dynamically recorded computation graph. Parameters are
// long-lived leaves; everything else is rebuilt on each forward pass.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  // Zero-filled gradient buffer with the value's shape, allocated on demand.
  Tensor& grad_buffer();
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);
Var parameter(Tensor value);

// Reverse sweep from a single-element root; gradients accumulate into every
// reachable node that requires them.
void backward(const Var& root);

bool grad_enabled();

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
// x: (n, d), bias: (d)
Var add_row_bias(const Var& x, const Var& bias);
// x: (n, in), weight: (in, out), bias: (out) or null
Var linear(const Var& x, const Var& weight, const Var& bias);
Var gelu(const Var& a);
Var sigmoid(const Var& a);
// Per-row normalization over the last dimension of a (n, d) tensor.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps);
Var softmax_rows(const Var& x);
// x: (C, H, W); weight: (Co, C, k, k); bias: (Co) or null
Var conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t stride, std::size_t pad);
// weight: (C, k, k)
Var depthwise_conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t pad);
// (C, H, W) <-> (H*W, C)
Var chw_to_tokens(const Var& x);
Var tokens_to_chw(const Var& x, std::size_t height, std::size_t width);
// Half-pixel-centered bilinear resampling of a (C, H, W) tensor.
Var bilinear_resize(const Var& x, std::size_t height, std::size_t width);
// Concatenation along the leading dimension.
Var concat(const std::vector<Var>& parts);
// Concatenation of 2-D tensors along columns.
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& x, std::size_t start, std::size_t count);
Var slice_cols(const Var& x, std::size_t start, std::size_t count);
// (n, d) -> (1, d)
Var mean_rows(const Var& x);
// (1, d) -> (n, d)
Var broadcast_rows(const Var& x, std::size_t n);
Var reshape(const Var& x, Shape shape);
// Scalar sum of x * weights (weights constant).
Var dot_const(const Var& x, const Tensor& weights);

}  // namespace ops

// Bilinear resampling kernel shared with the image pipeline.
Tensor bilinear_resize(const Tensor& chw, std::size_t height, std::size_t width);

}  // namespace surmr::nn
