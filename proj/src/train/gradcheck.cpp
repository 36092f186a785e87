#include "surmr/train/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "surmr/core/quality.hpp"
#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"
#include "surmr/model/loss.hpp"

namespace surmr::train {

namespace ops = nn::ops;
using nn::Var;

bool GradcheckReport::passed() const {
  if (modules.empty()) return false;
  for (const auto& m : modules)
    if (!m.passed) return false;
  return true;
}

namespace {

double eval(const std::function<Var()>& objective) {
  nn::NoGradGuard guard;
  Var out = objective();
  if (out->value.size() != 1) throw Error("gradient check objective must be a scalar");
  return out->value[0];
}

std::vector<std::size_t> pick(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (cap == 0 || n <= cap) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else {
    // Always includes element 0, which the negative control perturbs.
    for (std::size_t k = 0; k < cap; ++k) idx.push_back(cap == 1 ? 0 : k * (n - 1) / (cap - 1));
  }
  return idx;
}

}  // namespace

ModuleCheck check_gradients(const std::string& module, const nn::ParamList& params,
                            const std::function<Var()>& objective, const GradcheckOptions& opt) {
  nn::zero_grads(params);
  {
    Var out = objective();
    if (out->value.size() != 1) throw Error("gradient check objective must be a scalar");
    nn::backward(out);
  }
  std::vector<nn::Tensor> analytic;
  for (const auto& p : params) analytic.push_back(p.var->grad_buffer());
  if (opt.corrupt && !analytic.empty() && analytic[0].size() > 0) {
    analytic[0][0] += 1e-2 * (1.0 + std::abs(analytic[0][0]));
  }

  ModuleCheck mc;
  mc.module = module;
  mc.tolerance = opt.tolerance;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& value = params[t].var->value;
    ++mc.tensors;
    const auto indices = pick(value.size(), opt.max_elements_per_tensor);
    for (std::size_t i : indices) {
      const double saved = value[i];
      value[i] = saved + opt.step;
      const double up = eval(objective);
      value[i] = saved - opt.step;
      const double down = eval(objective);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double a = analytic[t][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opt.floor});
      ++mc.elements;
      if (mc.worst.empty() || rel > mc.max_rel_error) {
        mc.max_rel_error = rel;
        mc.worst = params[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  nn::zero_grads(params);
  mc.passed = mc.max_rel_error < opt.tolerance;
  return mc;
}

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names{"linear", "loss",        "head",       "dfrl",
                                              "mhaap",  "gap_pool",    "mixer",      "transformer",
                                              "mlp_fusion", "backbone", "network"};
  return names;
}

namespace {

void randomize(const nn::ParamList& params, nn::Rng& rng) {
  for (const auto& p : params) p.var->value = nn::normal_init(p.var->value.shape(), 0.5, rng);
}

Var input(nn::ParamList& params, const std::string& name, nn::Shape shape, nn::Rng& rng) {
  Var v = nn::parameter(nn::normal_init(std::move(shape), 1.0, rng));
  params.push_back({name, v});
  return v;
}

model::NetworkConfig micro_config(model::Variant v) {
  model::NetworkConfig c;
  c.variant = v;
  c.backbone.stage_channels = {4, 4, 4, 4};
  c.backbone.stage_depths = {1, 1, 1, 1};
  c.backbone.input_height = 32;
  c.backbone.input_width = 32;
  c.backbone.attention_head_dim = 2;
  c.backbone.sepconv_kernel = 3;
  c.mhaap.queries = 2;
  c.mhaap.heads = 2;
  c.mhaap.out_channels = 4;
  c.mixer.layers = 1;
  c.mixer.token_hidden = 8;
  c.mixer.channel_hidden = 8;
  c.transformer_layers = 1;
  c.transformer_heads = 2;
  return c;
}

ModuleCheck run_module(const std::string& name, const GradcheckOptions& opt) {
  nn::Rng rng(core::derive_seed(opt.seed, "gradcheck/" + name));
  nn::ParamList params;
  std::function<Var()> f;
  GradcheckOptions o = opt;
  const double eps = 1e-5;

  if (name == "linear") {
    // Quadratic in the weights: sum of squared outputs of one affine map.
    auto lin = std::make_shared<nn::Linear>(4, 3, rng);
    lin->collect("linear", params);
    randomize(params, rng);
    Var x = input(params, "input", {1, 4}, rng);
    f = [lin, x] {
      Var y = (*lin)(x);
      return ops::matmul(y, ops::transpose(y));
    };
    o.tolerance = std::min(opt.tolerance, 1e-6);
  } else if (name == "loss") {
    Var pred = input(params, "prediction", {1, 2}, rng);
    pred->value = nn::Tensor({1, 2}, {0.3, 0.8});
    f = [pred] { return model::joint_loss(pred, model::Target{0.9, 0.1}, model::LossWeights{}); };
  } else if (name == "head") {
    auto head = std::make_shared<model::RegressionHead>(8, 8, rng);
    head->collect("head", params);
    randomize(params, rng);
    Var x = input(params, "input", {1, 8}, rng);
    auto r = nn::normal_init({1, 2}, 1.0, rng);
    f = [head, x, r] { return ops::dot_const((*head)(x), r); };
  } else if (name == "dfrl") {
    auto stage = std::make_shared<model::DfrlStage>(3, rng);
    stage->collect("dfrl", params);
    randomize(params, rng);
    Var x = input(params, "input", {3, 4, 4}, rng);
    auto r = nn::normal_init({3, 4, 4}, 1.0, rng);
    f = [stage, x, r] { return ops::dot_const((*stage)(x), r); };
  } else if (name == "mhaap" || name == "gap_pool") {
    Var s1 = input(params, "stage1", {2, 4, 4}, rng);
    Var s2 = input(params, "stage2", {2, 2, 2}, rng);
    std::function<Var()> pool;
    if (name == "mhaap") {
      model::MhaapConfig mc;
      mc.queries = 2;
      mc.heads = 2;
      mc.out_channels = 3;
      auto m = std::make_shared<model::Mhaap>(4, mc, 3, 3, eps, rng);
      nn::ParamList own;
      m->collect("mhaap", own);
      randomize(own, rng);
      params.insert(params.end(), own.begin(), own.end());
      pool = [m, s1, s2] { return (*m)({s1, s2}); };
    } else {
      auto g = std::make_shared<model::GapPooling>(4, 3, 2, 3, 3, rng);
      nn::ParamList own;
      g->collect("gap_pool", own);
      randomize(own, rng);
      params.insert(params.end(), own.begin(), own.end());
      pool = [g, s1, s2] { return (*g)({s1, s2}); };
    }
    auto r = nn::normal_init({2, 3}, 1.0, rng);
    f = [pool, r] { return ops::dot_const(pool(), r); };
  } else if (name == "mixer" || name == "transformer" || name == "mlp_fusion") {
    std::function<Var(const Var&)> fuse;
    nn::ParamList own;
    if (name == "mixer") {
      auto m = std::make_shared<model::MixerFusion>(3, 4, 2, 8, 8, eps, rng);
      m->collect("mixer", own);
      fuse = [m](const Var& x) { return (*m)(x); };
    } else if (name == "transformer") {
      auto t = std::make_shared<model::TransformerFusion>(4, 1, 2, eps, rng);
      t->collect("transformer", own);
      fuse = [t](const Var& x) { return (*t)(x); };
    } else {
      auto m = std::make_shared<model::MlpFusion>(3, 4, rng);
      m->collect("mlp_fusion", own);
      fuse = [m](const Var& x) { return (*m)(x); };
    }
    randomize(own, rng);
    params = own;
    Var x = input(params, "input", {3, 4}, rng);
    auto r = nn::normal_init({1, 4}, 1.0, rng);
    f = [fuse, x, r] { return ops::dot_const(fuse(x), r); };
  } else if (name == "backbone") {
    auto cfg = micro_config(model::Variant::full).backbone;
    auto b = std::make_shared<model::Backbone>(cfg, eps, rng);
    b->collect("backbone", params);
    randomize(params, rng);
    Var x = input(params, "input", {3, 32, 32}, rng);
    std::vector<nn::Tensor> weights;
    for (std::size_t l = 0; l < 4; ++l) weights.push_back(nn::normal_init({cfg.stage_channels[l], cfg.stage_height(l), cfg.stage_width(l)}, 1.0, rng));
    f = [b, x, weights] {
      auto fp = b->forward(x);
      Var total = ops::dot_const(fp[0], weights[0]);
      for (std::size_t l = 1; l < 4; ++l) total = ops::add(total, ops::dot_const(fp[l], weights[l]));
      return total;
    };
    if (o.max_elements_per_tensor == 0) o.max_elements_per_tensor = 16;
  } else if (name == "network") {
    auto net = std::make_shared<model::Network>(micro_config(model::Variant::full), opt.seed);
    params = net->parameters();
    randomize(params, rng);
    Var a = input(params, "original", {3, 32, 32}, rng);
    Var b = input(params, "compressed", {3, 32, 32}, rng);
    f = [net, a, b] { return model::joint_loss(net->forward(a, b), model::Target{0.97, 0.02}, model::LossWeights{}); };
    if (o.max_elements_per_tensor == 0) o.max_elements_per_tensor = 8;
  } else {
    throw Error("unknown gradient-check module '" + name + "'");
  }
  return check_gradients(name, params, f, o);
}

}  // namespace

GradcheckReport gradient_check_suite(const std::vector<std::string>& modules, const GradcheckOptions& options) {
  std::vector<std::string> names;
  for (const auto& m : modules) {
    if (m == "all") {
      names = gradcheck_modules();
      break;
    }
    names.push_back(m);
  }
  if (names.empty()) throw Error("no gradient-check modules selected");
  GradcheckReport report;
  for (const auto& n : names) report.modules.push_back(run_module(n, options));
  return report;
}

std::string format_gradcheck(const GradcheckReport& report) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"module", "tensors", "elements", "max_rel_error", "tolerance", "worst", "status"});
  for (const auto& m : report.modules) {
    w.row({m.module, std::to_string(m.tensors), std::to_string(m.elements), io::format_real(m.max_rel_error),
           io::format_real(m.tolerance), m.worst, m.passed ? "pass" : "fail"});
  }
  return ss.str();
}

}  // namespace surmr::train
