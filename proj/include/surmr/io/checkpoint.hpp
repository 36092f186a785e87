#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "surmr/model/network.hpp"

namespace surmr::io {

// Binary layout (little-endian):
//   "SURMRCK\0" | u32 version | u64 n | n bytes of JSON header |
//   u64 m | m bytes of float64 parameter data | u32 crc32 of all prior bytes
// The header carries the network config (variant and preprocessing
// included), training metadata and the ordered tensor table
// [{"name", "shape"}]; parameter data follows the table order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::size_t step = 0;
  std::uint64_t seed = 0;
  std::string phase;  // "init", "pretrain", "finetune", ...
  nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
  model::Network network;
  CheckpointMeta meta;
};

std::string serialize_checkpoint(const model::Network& net, const CheckpointMeta& meta);
void save_checkpoint(const std::filesystem::path& path, const model::Network& net, const CheckpointMeta& meta);

// Throws "corrupt checkpoint" on truncation or checksum failure,
// "unsupported checkpoint version" on a foreign version, and
// "config mismatch" when `expected` is given and differs.
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source,
                            std::optional<model::Variant> expected = std::nullopt);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<model::Variant> expected = std::nullopt);

}  // namespace surmr::io
