#include "surmr/labelgen/iqa.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "surmr/error.hpp"

namespace surmr::labelgen {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void check_pair(const io::Image& a, const io::Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw Error("image dimensions differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" + std::to_string(b.height) +
                "x" + std::to_string(b.channels));
  }
  if (a.pixels.empty()) throw Error("empty image");
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-(d * d) / (2 * kSigma * kSigma));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Valid-mode separable Gaussian filter of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t w, std::size_t h,
                                 const std::array<double, kWindow>& g) {
  const std::size_t ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> tmp(ow * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * plane[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(const io::Image& reference, const io::Image& distorted, const BuiltinConfig& config) {
  check_pair(reference, distorted);
  double se = 0.0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const double d = static_cast<double>(reference.pixels[i]) - static_cast<double>(distorted.pixels[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(reference.pixels.size());
  if (mse == 0.0) return config.psnr_cap_db;
  return std::min(config.psnr_cap_db, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const io::Image& reference, const io::Image& distorted) {
  check_pair(reference, distorted);
  const std::size_t w = reference.width, h = reference.height, nc = reference.channels;
  if (w < static_cast<std::size_t>(kWindow) || h < static_cast<std::size_t>(kWindow)) {
    throw Error("SSIM needs images of at least 11x11 pixels");
  }
  const auto g = gaussian_taps();
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  double channel_sum = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> x(w * h), y(w * h), xx(w * h), yy(w * h), xy(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
      x[i] = reference.pixels[i * nc + c];
      y[i] = distorted.pixels[i * nc + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, g), my = filter_valid(y, w, h, g);
    const auto sxx = filter_valid(xx, w, h, g), syy = filter_valid(yy, w, h, g), sxy = filter_valid(xy, w, h, g);
    double map_sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      map_sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    channel_sum += map_sum / static_cast<double>(mx.size());
  }
  return channel_sum / static_cast<double>(nc);
}

double score_builtin(std::string_view scorer_id, const io::Image& reference, const io::Image& distorted,
                     const BuiltinConfig& config) {
  if (scorer_id == "psnr") return psnr(reference, distorted, config);
  if (scorer_id == "ssim") return ssim(reference, distorted);
  throw Error("unknown built-in scorer '" + std::string(scorer_id) + "' (expected psnr or ssim)");
}

ScorerDescriptor builtin_descriptor(std::string_view scorer_id) {
  if (scorer_id != "psnr" && scorer_id != "ssim") {
    throw Error("unknown built-in scorer '" + std::string(scorer_id) + "' (expected psnr or ssim)");
  }
  return {std::string(scorer_id), Polarity::higher_better, Origin::builtin};
}

}  // namespace surmr::labelgen
