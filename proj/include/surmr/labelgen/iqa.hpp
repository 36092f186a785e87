#pragma once

#include <string_view>

#include "surmr/io/image.hpp"
#include "surmr/labelgen/labelgen.hpp"

namespace surmr::labelgen {

struct BuiltinConfig {
  // Returned by PSNR for identical images and used as an upper clamp.
  double psnr_cap_db = 100.0;
};

// PSNR in dB over all pixels and channels, 8-bit peak.
double psnr(const io::Image& reference, const io::Image& distorted, const BuiltinConfig& config = {});

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, L = 255, valid-region map; per-channel means are averaged.
double ssim(const io::Image& reference, const io::Image& distorted);

// Dispatch by id: "psnr" or "ssim".
double score_builtin(std::string_view scorer_id, const io::Image& reference, const io::Image& distorted,
                     const BuiltinConfig& config = {});
ScorerDescriptor builtin_descriptor(std::string_view scorer_id);

}  // namespace surmr::labelgen
