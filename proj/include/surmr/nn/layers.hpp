#pragma once

#include <random>
#include <string>
#include <vector>

#include "surmr/nn/autograd.hpp"

namespace surmr::nn {

using Rng = std::mt19937_64;

struct NamedParam {
  std::string name;
  Var var;
};
using ParamList = std::vector<NamedParam>;

// Fan-in scaled uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng);
Tensor normal_init(Shape shape, double stddev, Rng& rng);

// Row-wise affine map x(n, in) -> (n, out). Weight is stored (in, out).
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);

  Var operator()(const Var& x) const { return ops::linear(x, weight, bias); }
  void collect(const std::string& prefix, ParamList& out) const;
  std::size_t in_features() const { return weight->value.dim(0); }
  std::size_t out_features() const { return weight->value.dim(1); }
  void zero();

  Var weight;
  Var bias;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(std::size_t width, double eps);

  Var operator()(const Var& x) const { return ops::layer_norm(x, gamma, beta, eps); }
  void collect(const std::string& prefix, ParamList& out) const;

  Var gamma;
  Var beta;
  double eps = 1e-5;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t pad,
         Rng& rng);

  Var operator()(const Var& x) const { return ops::conv2d(x, weight, bias, stride, pad); }
  void collect(const std::string& prefix, ParamList& out) const;
  void zero();

  Var weight;
  Var bias;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

class DepthwiseConv2d {
 public:
  DepthwiseConv2d() = default;
  DepthwiseConv2d(std::size_t channels, std::size_t kernel, Rng& rng);

  Var operator()(const Var& x) const { return ops::depthwise_conv2d(x, weight, bias, pad); }
  void collect(const std::string& prefix, ParamList& out) const;

  Var weight;
  Var bias;
  std::size_t pad = 0;
};

// Scaled dot-product attention split into `heads` column groups.
// q: (Y, C), k/v: (N, C). Returns (Y, C). When `weights_out` is given, the
// per-head (Y, N) softmax matrices are appended to it.
Var multi_head_attention(const Var& q, const Var& k, const Var& v, std::size_t heads,
                         double scale, std::vector<Var>* weights_out = nullptr);

std::size_t parameter_count(const ParamList& params);
void zero_grads(const ParamList& params);

}  // namespace surmr::nn
