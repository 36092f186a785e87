#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "surmr/nn/tensor.hpp"

namespace surmr::io {

// 8-bit interleaved image with 1 (gray) or 3 (RGB) channels.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// Binary PGM/PPM (P5/P6, maxval 255) and PNG, chosen by file extension.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

// (3, H, W) tensor in [0, 1]; gray images are replicated across channels.
nn::Tensor to_rgb_tensor(const Image& image);

}  // namespace surmr::io
