#include "surmr/nn/layers.hpp"

#include <cmath>

#include "surmr/error.hpp"

namespace surmr::nn {

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.storage()) v = dist(rng);
  return t;
}

Tensor normal_init(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.storage()) v = dist(rng);
  return t;
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias)
    : weight(parameter(uniform_init({in, out}, in, rng))) {
  if (with_bias) bias = parameter(Tensor({out}));
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias) out.push_back({prefix + ".bias", bias});
}

void Linear::zero() {
  weight->value.fill(0.0);
  if (bias) bias->value.fill(0.0);
}

LayerNorm::LayerNorm(std::size_t width, double eps_)
    : gamma(parameter(Tensor({width}, 1.0))), beta(parameter(Tensor({width}))), eps(eps_) {}

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
               std::size_t pad_, Rng& rng)
    : weight(parameter(uniform_init({out, in, kernel, kernel}, in * kernel * kernel, rng))),
      bias(parameter(Tensor({out}))),
      stride(stride_),
      pad(pad_) {}

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

void Conv2d::zero() {
  weight->value.fill(0.0);
  bias->value.fill(0.0);
}

DepthwiseConv2d::DepthwiseConv2d(std::size_t channels, std::size_t kernel, Rng& rng)
    : weight(parameter(uniform_init({channels, kernel, kernel}, kernel * kernel, rng))),
      bias(parameter(Tensor({channels}))),
      pad(kernel / 2) {
  if (kernel % 2 == 0) throw Error("depthwise kernel size must be odd");
}

void DepthwiseConv2d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Var multi_head_attention(const Var& q, const Var& k, const Var& v, std::size_t heads,
                         double scale, std::vector<Var>* weights_out) {
  const std::size_t width = q->value.dim(1);
  if (heads == 0 || width % heads != 0) {
    throw Error("attention width " + std::to_string(width) + " not divisible by " +
                std::to_string(heads) + " heads");
  }
  if (k->value.dim(1) != width || v->value.dim(1) != width) {
    throw Error("attention: query/key/value widths differ");
  }
  const std::size_t head_dim = width / heads;
  std::vector<Var> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = heads == 1 ? q : ops::slice_cols(q, h * head_dim, head_dim);
    Var kh = heads == 1 ? k : ops::slice_cols(k, h * head_dim, head_dim);
    Var vh = heads == 1 ? v : ops::slice_cols(v, h * head_dim, head_dim);
    Var scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), scale);
    Var weights = ops::softmax_rows(scores);
    if (weights_out) weights_out->push_back(weights);
    outputs.push_back(ops::matmul(weights, vh));
  }
  return heads == 1 ? outputs.front() : ops::concat_cols(outputs);
}

std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var->value.size();
  return n;
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) p.var->grad_buffer().fill(0.0);
}

}  // namespace surmr::nn
