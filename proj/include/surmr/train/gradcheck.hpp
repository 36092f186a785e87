#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "surmr/nn/layers.hpp"

namespace surmr::train {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor);
  // gradients that vanish in exact arithmetic are judged on absolute error.
  double floor = 1e-5;
  std::uint64_t seed = 0;
  // 0 checks every element; otherwise an evenly spaced subset per tensor.
  std::size_t max_elements_per_tensor = 0;
  // Negative control: perturb one analytic gradient before comparing.
  bool corrupt = false;
};

struct ModuleCheck {
  std::string module;
  std::size_t tensors = 0;
  std::size_t elements = 0;
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[<index>]" of the largest error
  double tolerance = 0.0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<ModuleCheck> modules;
  bool passed() const;
};

// Compares reverse-mode gradients of `objective` (a single-element Var)
// with central differences for every tensor in `params`.
ModuleCheck check_gradients(const std::string& module, const nn::ParamList& params,
                            const std::function<nn::Var()>& objective, const GradcheckOptions& options);

// linear, loss, head, dfrl, mhaap, gap_pool, mixer, transformer, mlp_fusion,
// backbone, network
const std::vector<std::string>& gradcheck_modules();

// Each module is built at widths <= 8 with randomized parameters (so
// zero-initialized layers are exercised too). "all" selects every module.
GradcheckReport gradient_check_suite(const std::vector<std::string>& modules, const GradcheckOptions& options);

// module,tensors,elements,max_rel_error,tolerance,worst,status
std::string format_gradcheck(const GradcheckReport& report);

}  // namespace surmr::train
