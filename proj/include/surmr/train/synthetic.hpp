#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "surmr/core/quality.hpp"
#include "surmr/io/formats.hpp"
#include "surmr/io/image.hpp"

namespace surmr::train {

// Procedural ladders: textured originals degraded by blur + quantization of
// per-ladder strength. Human verdicts threshold 1 - SSIM, machine verdicts
// threshold a PSNR-based distortion and then pass through
// simulate_machine_population with random flips.
struct SyntheticSpec {
  std::size_t ladders = 8;
  std::size_t rungs = 6;
  std::size_t size = 64;
  std::size_t humans = 16;
  std::size_t machines = 8;
  double machine_flip_rate = 0.05;
  std::uint64_t seed = 0;
  std::string prefix = "L";
};

struct SyntheticData {
  io::Manifest manifest;                 // refs are bare file names
  std::map<std::string, io::Image> images;  // keyed by ref
  std::vector<core::SatisfactionRecord> records;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Writes <ref>.png images, manifest.json and records.csv into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

struct SyntheticLabels {
  io::LabelMap sur;
  io::LabelMap smr;
  io::LabelMap proxy;  // single-scorer (PSNR) proxy SUR
};

SyntheticLabels synthetic_labels(const SyntheticData& data);

}  // namespace surmr::train
