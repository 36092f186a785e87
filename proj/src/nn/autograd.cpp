#include "surmr/nn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "surmr/error.hpp"
#include "surmr/nn/kernels.hpp"

namespace surmr::nn {

namespace {
thread_local bool g_grad_enabled = true;

Var make_result(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  auto out = std::make_shared<Node>();
  out->value = std::move(value);
  if (!g_grad_enabled) return out;
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Var& v) { return v && v->requires_grad; });
  if (needs) {
    out->requires_grad = true;
    out->inputs = std::move(inputs);
    out->backward_fn = std::move(fn);
  }
  return out;
}

bool wants(const Var& v) { return v && v->requires_grad; }

void require_rank(const Var& v, std::size_t rank, const char* what) {
  if (v->value.rank() != rank) {
    throw Error(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                shape_string(v->value.shape()));
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

struct ResampleTap {
  std::size_t lo, hi;
  double frac;
};

std::vector<ResampleTap> resample_taps(std::size_t in, std::size_t out) {
  std::vector<ResampleTap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
    if (src < 0.0) src = 0.0;
    auto lo = static_cast<std::size_t>(std::floor(src));
    if (lo > in - 1) lo = in - 1;
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

Tensor& Node::grad_buffer() {
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Var& root) {
  if (root->value.size() != 1) throw Error("backward: root must hold a single element");
  if (!root->requires_grad) return;
  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child && child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.shape() == n->value.shape()) n->backward_fn(*n);
  }
}

namespace ops {

Var add(const Var& a, const Var& b) {
  require_shape(b->value, a->value.shape(), "add");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (auto& in : self.inputs) {
      if (!wants(in)) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_shape(b->value, a->value.shape(), "sub");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (wants(self.inputs[0])) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants(self.inputs[1])) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (auto& v : out.storage()) v *= s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Var matmul(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(1);
  if (b->value.dim(0) != k) {
    throw Error("matmul: inner dimensions differ " + shape_string(a->value.shape()) + " x " +
                shape_string(b->value.shape()));
  }
  Tensor out({m, n});
  kernels::matmul(a->value.data(), b->value.data(), out.data(), m, k, n, false);
  return make_result(std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& A = self.inputs[0];
    const auto& B = self.inputs[1];
    if (wants(A)) kernels::matmul_nt(self.grad.data(), B->value.data(), A->grad_buffer().data(), m, n, k, true);
    if (wants(B)) kernels::matmul_tn(A->value.data(), self.grad.data(), B->grad_buffer().data(), k, m, n, true);
  });
}

Var transpose(const Var& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a->value.dim(0), c = a->value.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = a->value.at(i, j);
  return make_result(std::move(out), {a}, [r, c](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g.at(i, j) += self.grad.at(j, i);
  });
}

Var add_row_bias(const Var& x, const Var& bias) {
  require_rank(x, 2, "add_row_bias");
  const std::size_t n = x->value.dim(0), d = x->value.dim(1);
  require_shape(bias->value, {d}, "add_row_bias bias");
  Tensor out = x->value;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) += bias->value[j];
  return make_result(std::move(out), {x, bias}, [n, d](Node& self) {
    if (wants(self.inputs[0])) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants(self.inputs[1])) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) g[j] += self.grad.at(i, j);
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  Var y = matmul(x, weight);
  return bias ? add_row_bias(y, bias) : y;
}

Var gelu(const Var& a) {
  Tensor out = a->value;
  for (auto& v : out.storage()) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  return make_result(std::move(out), {a}, [](Node& self) {
    const auto& x = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = x[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->value;
  for (auto& v : out.storage()) v = 1.0 / (1.0 + std::exp(-v));
  return make_result(std::move(out), {a}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = self.value[i];
      g[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_rank(x, 2, "layer_norm");
  const std::size_t n = x->value.dim(0), d = x->value.dim(1);
  require_shape(gamma->value, {d}, "layer_norm gamma");
  require_shape(beta->value, {d}, "layer_norm beta");
  Tensor out({n, d});
  auto normalized = std::make_shared<Tensor>(Shape{n, d});
  auto inv_std = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += x->value.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x->value.at(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (x->value.at(i, j) - mean) * is;
      normalized->at(i, j) = xh;
      out.at(i, j) = xh * gamma->value[j] + beta->value[j];
    }
  }
  return make_result(std::move(out), {x, gamma, beta}, [n, d, normalized, inv_std](Node& self) {
    const auto& X = self.inputs[0];
    const auto& G = self.inputs[1];
    const auto& B = self.inputs[2];
    if (wants(G) || wants(B)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double go = self.grad.at(i, j);
          if (wants(G)) G->grad_buffer()[j] += go * normalized->at(i, j);
          if (wants(B)) B->grad_buffer()[j] += go;
        }
      }
    }
    if (!wants(X)) return;
    auto& gx = X->grad_buffer();
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < n; ++i) {
      double mean_g = 0.0, mean_gx = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double gh = self.grad.at(i, j) * G->value[j];
        mean_g += gh;
        mean_gx += gh * normalized->at(i, j);
      }
      mean_g *= inv_d;
      mean_gx *= inv_d;
      for (std::size_t j = 0; j < d; ++j) {
        const double gh = self.grad.at(i, j) * G->value[j];
        gx.at(i, j) += (*inv_std)[i] * (gh - mean_g - normalized->at(i, j) * mean_gx);
      }
    }
  });
}

Var softmax_rows(const Var& x) {
  require_rank(x, 2, "softmax_rows");
  const std::size_t n = x->value.dim(0), d = x->value.dim(1);
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double mx = x->value.at(i, 0);
    for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, x->value.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double e = std::exp(x->value.at(i, j) - mx);
      out.at(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) /= total;
  }
  return make_result(std::move(out), {x}, [n, d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += self.grad.at(i, j) * self.value.at(i, j);
      for (std::size_t j = 0; j < d; ++j) g.at(i, j) += self.value.at(i, j) * (self.grad.at(i, j) - dot);
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t stride, std::size_t pad) {
  require_rank(x, 3, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  kernels::ConvGeometry g;
  g.in_channels = x->value.dim(0);
  g.in_height = x->value.dim(1);
  g.in_width = x->value.dim(2);
  g.out_channels = weight->value.dim(0);
  g.kernel = weight->value.dim(2);
  g.stride = stride;
  g.pad = pad;
  if (weight->value.dim(1) != g.in_channels || weight->value.dim(3) != g.kernel) {
    throw Error("conv2d: weight " + shape_string(weight->value.shape()) + " incompatible with input " +
                shape_string(x->value.shape()));
  }
  if (g.in_height + 2 * pad < g.kernel || g.in_width + 2 * pad < g.kernel) {
    throw Error("conv2d: input " + shape_string(x->value.shape()) + " smaller than kernel");
  }
  if (bias) require_shape(bias->value, {g.out_channels}, "conv2d bias");
  Tensor out({g.out_channels, g.out_height(), g.out_width()});
  kernels::conv2d_forward(g, x->value.data(), weight->value.data(), bias ? bias->value.data() : nullptr,
                          out.data());
  return make_result(std::move(out), {x, weight, bias}, [g](Node& self) {
    const auto& X = self.inputs[0];
    const auto& Wt = self.inputs[1];
    const auto& B = self.inputs[2];
    if (wants(X)) kernels::conv2d_backward_input(g, Wt->value.data(), self.grad.data(), X->grad_buffer().data());
    if (wants(Wt) || wants(B)) {
      Tensor scratch_w;
      double* dw = nullptr;
      if (wants(Wt)) {
        dw = Wt->grad_buffer().data();
      } else {
        scratch_w = Tensor(Wt->value.shape());
        dw = scratch_w.data();
      }
      kernels::conv2d_backward_weight(g, X->value.data(), self.grad.data(), dw,
                                      wants(B) ? B->grad_buffer().data() : nullptr);
    }
  });
}

Var depthwise_conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t pad) {
  require_rank(x, 3, "depthwise_conv2d input");
  require_rank(weight, 3, "depthwise_conv2d weight");
  kernels::ConvGeometry g;
  g.in_channels = g.out_channels = x->value.dim(0);
  g.in_height = x->value.dim(1);
  g.in_width = x->value.dim(2);
  g.kernel = weight->value.dim(1);
  g.stride = 1;
  g.pad = pad;
  if (weight->value.dim(0) != g.in_channels || weight->value.dim(2) != g.kernel) {
    throw Error("depthwise_conv2d: weight " + shape_string(weight->value.shape()) +
                " incompatible with input " + shape_string(x->value.shape()));
  }
  if (bias) require_shape(bias->value, {g.in_channels}, "depthwise_conv2d bias");
  Tensor out({g.out_channels, g.out_height(), g.out_width()});
  kernels::depthwise_forward(g, x->value.data(), weight->value.data(),
                             bias ? bias->value.data() : nullptr, out.data());
  return make_result(std::move(out), {x, weight, bias}, [g](Node& self) {
    const auto& X = self.inputs[0];
    const auto& Wt = self.inputs[1];
    const auto& B = self.inputs[2];
    if (wants(X)) kernels::depthwise_backward_input(g, Wt->value.data(), self.grad.data(), X->grad_buffer().data());
    if (wants(Wt) || wants(B)) {
      Tensor scratch_w;
      double* dw = nullptr;
      if (wants(Wt)) {
        dw = Wt->grad_buffer().data();
      } else {
        scratch_w = Tensor(Wt->value.shape());
        dw = scratch_w.data();
      }
      kernels::depthwise_backward_weight(g, X->value.data(), self.grad.data(), dw,
                                         wants(B) ? B->grad_buffer().data() : nullptr);
    }
  });
}

Var chw_to_tokens(const Var& x) {
  require_rank(x, 3, "chw_to_tokens");
  const std::size_t c = x->value.dim(0), hw = x->value.dim(1) * x->value.dim(2);
  Tensor out({hw, c});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < hw; ++p) out[p * c + ch] = x->value[ch * hw + p];
  return make_result(std::move(out), {x}, [c, hw](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) g[ch * hw + p] += self.grad[p * c + ch];
  });
}

Var tokens_to_chw(const Var& x, std::size_t height, std::size_t width) {
  require_rank(x, 2, "tokens_to_chw");
  const std::size_t hw = x->value.dim(0), c = x->value.dim(1);
  if (hw != height * width) throw Error("tokens_to_chw: token count does not match spatial size");
  Tensor out({c, height, width});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < hw; ++p) out[ch * hw + p] = x->value[p * c + ch];
  return make_result(std::move(out), {x}, [c, hw](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) g[p * c + ch] += self.grad[ch * hw + p];
  });
}

Var bilinear_resize(const Var& x, std::size_t height, std::size_t width) {
  require_rank(x, 3, "bilinear_resize");
  const std::size_t c = x->value.dim(0), ih = x->value.dim(1), iw = x->value.dim(2);
  Tensor out = nn::bilinear_resize(x->value, height, width);
  return make_result(std::move(out), {x}, [c, ih, iw, height, width](Node& self) {
    const auto ty = resample_taps(ih, height);
    const auto tx = resample_taps(iw, width);
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* gc = g.data() + ch * ih * iw;
      for (std::size_t oy = 0; oy < height; ++oy) {
        const auto& a = ty[oy];
        for (std::size_t ox = 0; ox < width; ++ox) {
          const auto& b = tx[ox];
          const double go = self.grad[(ch * height + oy) * width + ox];
          gc[a.lo * iw + b.lo] += go * (1 - a.frac) * (1 - b.frac);
          gc[a.lo * iw + b.hi] += go * (1 - a.frac) * b.frac;
          gc[a.hi * iw + b.lo] += go * a.frac * (1 - b.frac);
          gc[a.hi * iw + b.hi] += go * a.frac * b.frac;
        }
      }
    }
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat: no inputs");
  Shape shape = parts.front()->value.shape();
  std::size_t lead = 0;
  for (const auto& p : parts) {
    Shape s = p->value.shape();
    if (s.size() != shape.size() || !std::equal(s.begin() + 1, s.end(), shape.begin() + 1)) {
      throw Error("concat: trailing shapes differ " + shape_string(s) + " vs " + shape_string(shape));
    }
    lead += s[0];
  }
  shape[0] = lead;
  Tensor out(shape);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p->value.storage().begin(), p->value.storage().end(), out.storage().begin() + offset);
    offset += p->value.size();
  }
  return make_result(std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (auto& in : self.inputs) {
      const std::size_t n = in->value.size();
      if (wants(in)) {
        auto& g = in->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[off + i];
      }
      off += n;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  const std::size_t rows = parts.front()->value.dim(0);
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p->value.dim(0) != rows) throw Error("concat_cols: row counts differ");
    cols += p->value.dim(1);
  }
  Tensor out({rows, cols});
  std::size_t c0 = 0;
  for (const auto& p : parts) {
    const std::size_t w = p->value.dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < w; ++j) out.at(r, c0 + j) = p->value.at(r, j);
    c0 += w;
  }
  return make_result(std::move(out), parts, [rows](Node& self) {
    std::size_t c = 0;
    for (auto& in : self.inputs) {
      const std::size_t w = in->value.dim(1);
      if (wants(in)) {
        auto& g = in->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < w; ++j) g.at(r, j) += self.grad.at(r, c + j);
      }
      c += w;
    }
  });
}

Var slice_rows(const Var& x, std::size_t start, std::size_t count) {
  require_rank(x, 2, "slice_rows");
  const std::size_t d = x->value.dim(1);
  if (start + count > x->value.dim(0)) throw Error("slice_rows: range out of bounds");
  Tensor out({count, d});
  std::copy_n(x->value.data() + start * d, count * d, out.data());
  return make_result(std::move(out), {x}, [start, count, d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < count * d; ++i) g[start * d + i] += self.grad[i];
  });
}

Var slice_cols(const Var& x, std::size_t start, std::size_t count) {
  require_rank(x, 2, "slice_cols");
  const std::size_t rows = x->value.dim(0);
  if (start + count > x->value.dim(1)) throw Error("slice_cols: range out of bounds");
  Tensor out({rows, count});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < count; ++j) out.at(r, j) = x->value.at(r, start + j);
  return make_result(std::move(out), {x}, [rows, start, count](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < count; ++j) g.at(r, start + j) += self.grad.at(r, j);
  });
}

Var mean_rows(const Var& x) {
  require_rank(x, 2, "mean_rows");
  const std::size_t n = x->value.dim(0), d = x->value.dim(1);
  Tensor out({1, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += x->value.at(i, j);
  for (std::size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(n);
  return make_result(std::move(out), {x}, [n, d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) g.at(i, j) += self.grad[j] * inv;
  });
}

Var broadcast_rows(const Var& x, std::size_t n) {
  require_rank(x, 2, "broadcast_rows");
  if (x->value.dim(0) != 1) throw Error("broadcast_rows: expected a single row");
  const std::size_t d = x->value.dim(1);
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(x->value.data(), d, out.data() + i * d);
  return make_result(std::move(out), {x}, [n, d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) g[j] += self.grad.at(i, j);
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x->value.reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Var dot_const(const Var& x, const Tensor& weights) {
  if (weights.size() != x->value.size()) throw Error("dot_const: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += x->value[i] * weights[i];
  return make_result(Tensor({1}, {s}), {x}, [weights](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * weights[i];
  });
}

}  // namespace ops

Tensor bilinear_resize(const Tensor& chw, std::size_t height, std::size_t width) {
  if (chw.rank() != 3) throw Error("bilinear_resize: expected (C, H, W)");
  if (height == 0 || width == 0) throw Error("bilinear_resize: empty target size");
  const std::size_t c = chw.dim(0), ih = chw.dim(1), iw = chw.dim(2);
  const auto ty = resample_taps(ih, height);
  const auto tx = resample_taps(iw, width);
  Tensor out({c, height, width});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = chw.data() + ch * ih * iw;
    for (std::size_t oy = 0; oy < height; ++oy) {
      const auto& a = ty[oy];
      for (std::size_t ox = 0; ox < width; ++ox) {
        const auto& b = tx[ox];
        const double top = src[a.lo * iw + b.lo] * (1 - b.frac) + src[a.lo * iw + b.hi] * b.frac;
        const double bot = src[a.hi * iw + b.lo] * (1 - b.frac) + src[a.hi * iw + b.hi] * b.frac;
        out[(ch * height + oy) * width + ox] = top * (1 - a.frac) + bot * a.frac;
      }
    }
  }
  return out;
}

}  // namespace surmr::nn
