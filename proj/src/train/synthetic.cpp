#include "surmr/train/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"
#include "surmr/labelgen/iqa.hpp"
#include "surmr/labelgen/labelgen.hpp"

namespace surmr::train {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

using Plane = std::vector<double>;  // interleaved RGB, values in [0, 255]

Plane texture(std::size_t n, std::mt19937_64& rng) {
  Plane img(n * n * 3);
  double base[3];
  for (auto& b : base) b = uniform(rng, 60, 190);
  struct Wave {
    double fx, fy, phase, amp[3];
  };
  std::vector<Wave> waves(2 + rng() % 4);
  for (auto& w : waves) {
    const double freq = uniform(rng, 0.02, 0.35), angle = uniform(rng, 0, std::numbers::pi);
    w.fx = freq * std::cos(angle);
    w.fy = freq * std::sin(angle);
    w.phase = uniform(rng, 0, 2 * std::numbers::pi);
    for (auto& a : w.amp) a = uniform(rng, 5, 40);
  }
  struct Blob {
    double cx, cy, r, amp[3];
  };
  std::vector<Blob> blobs(rng() % 4);
  for (auto& b : blobs) {
    b.cx = uniform(rng, 0, static_cast<double>(n));
    b.cy = uniform(rng, 0, static_cast<double>(n));
    b.r = uniform(rng, 3, static_cast<double>(n) / 4);
    for (auto& a : b.amp) a = uniform(rng, -60, 60);
  }
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double v = base[c];
        for (const auto& w : waves) v += w.amp[c] * std::sin(2 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
        for (const auto& b : blobs) {
          const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
          v += b.amp[c] * std::exp(-d2 / (2 * b.r * b.r));
        }
        img[(y * n + x) * 3 + c] = std::clamp(v, 0.0, 255.0);
      }
  return img;
}

// Separable [1 2 1]/4 blur with clamped borders.
Plane blur(const Plane& in, std::size_t n) {
  Plane tmp(in.size()), out(in.size());
  auto at = [n](std::size_t y, std::size_t x, std::size_t c) { return (y * n + x) * 3 + c; };
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t l = x ? x - 1 : x, r = x + 1 < n ? x + 1 : x;
        tmp[at(y, x, c)] = 0.25 * in[at(y, l, c)] + 0.5 * in[at(y, x, c)] + 0.25 * in[at(y, r, c)];
      }
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t u = y ? y - 1 : y, d = y + 1 < n ? y + 1 : y;
        out[at(y, x, c)] = 0.25 * tmp[at(u, x, c)] + 0.5 * tmp[at(y, x, c)] + 0.25 * tmp[at(d, x, c)];
      }
  return out;
}

io::Image to_image(const Plane& p, std::size_t n, double quant_step) {
  io::Image img(n, n, 3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = quant_step > 1.0 ? std::round(p[i] / quant_step) * quant_step : p[i];
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(q, 0.0, 255.0)));
  }
  return img;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.ladders == 0 || spec.rungs == 0) throw Error("synthetic data needs at least one ladder and one rung");
  if (spec.size < 16) throw Error("synthetic images must be at least 16 pixels wide");
  SyntheticData data;
  const std::size_t n = spec.size;
  const int k_max = static_cast<int>(spec.rungs);
  for (std::size_t l = 0; l < spec.ladders; ++l) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "%s%04zu", spec.prefix.c_str(), l);
    const std::string id = idbuf;
    std::mt19937_64 rng(core::derive_seed(spec.seed, "synthetic/" + id));
    const Plane original = texture(n, rng);
    const double strength = uniform(rng, 0.4, 1.6);

    core::QualityLadder ladder;
    ladder.ladder_id = id;
    ladder.original_ref = id + "_orig.png";
    ladder.codec_tag = "blurquant";
    data.images[ladder.original_ref] = to_image(original, n, 0.0);

    std::vector<double> human_distortion, machine_distortion;
    Plane current = original;
    for (int k = 1; k <= k_max; ++k) {
      const int passes = static_cast<int>(std::lround(0.8 * strength * (k - 1)));
      current = original;
      for (int p = 0; p < passes; ++p) current = blur(current, n);
      const double step = 1.0 + 3.0 * strength * k;
      const std::string ref = id + "_r" + std::to_string(k) + ".png";
      auto img = to_image(current, n, step);
      const auto& orig = data.images.at(ladder.original_ref);
      human_distortion.push_back(1.0 - labelgen::ssim(orig, img));
      machine_distortion.push_back((40.0 - labelgen::psnr(orig, img)) / 20.0);
      data.images[ref] = std::move(img);
      ladder.rungs.push_back({k, static_cast<long long>(10 * k), ref});
    }
    ladder.normalize_and_validate();

    for (std::size_t h = 0; h < spec.humans; ++h) {
      const double tol = 0.7 * (static_cast<double>(h) + 0.5) / static_cast<double>(spec.humans);
      for (int k = 1; k <= k_max; ++k) {
        data.records.push_back({id, k, "human_" + std::to_string(h + 1), core::SubjectKind::human,
                                human_distortion[static_cast<std::size_t>(k - 1)] <= tol});
      }
    }
    core::MachinePopulationSpec mp;
    mp.flip_rate = spec.machine_flip_rate;
    for (std::size_t m = 0; m < spec.machines; ++m) {
      const double tol = 0.2 + 0.7 * (static_cast<double>(m) + 0.5) / static_cast<double>(spec.machines);
      int threshold = 0;
      while (threshold < k_max && machine_distortion[static_cast<std::size_t>(threshold)] <= tol) ++threshold;
      mp.thresholds.push_back(threshold);
    }
    auto machines = core::simulate_machine_population(ladder, mp, core::derive_seed(spec.seed, "machines/" + id));
    data.records.insert(data.records.end(), machines.begin(), machines.end());
    data.manifest.ladders.push_back(std::move(ladder));
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [ref, img] : data.images) io::write_image(dir / ref, img);
  io::write_text_file(dir / "manifest.json", io::format_manifest(data.manifest));
  io::write_text_file(dir / "records.csv", io::format_records(data.records));
}

SyntheticLabels synthetic_labels(const SyntheticData& data) {
  SyntheticLabels out;
  labelgen::ScoreTable scores;
  for (const auto& ladder : data.manifest.ladders) {
    const auto sur = core::ratio_curve(ladder, data.records, core::RatioKind::SUR);
    const auto smr = core::ratio_curve(ladder, data.records, core::RatioKind::SMR);
    for (const auto& p : sur.values) out.sur[{ladder.ladder_id, p.rung_index}] = p.ratio.value();
    for (const auto& p : smr.values) out.smr[{ladder.ladder_id, p.rung_index}] = p.ratio.value();
    const auto& orig = data.images.at(ladder.original_ref);
    for (const auto& r : ladder.rungs) {
      scores.add(ladder.ladder_id, r.rung_index, "psnr", labelgen::psnr(orig, data.images.at(r.image_ref)),
                 labelgen::Polarity::higher_better, labelgen::Origin::builtin);
    }
  }
  const std::vector<labelgen::ScorerDescriptor> scorers{labelgen::builtin_descriptor("psnr")};
  for (const auto& ladder : data.manifest.ladders) {
    const auto set = labelgen::proxy_sur(scores, scorers, ladder);
    out.proxy.insert(set.labels.begin(), set.labels.end());
  }
  return out;
}

}  // namespace surmr::train
