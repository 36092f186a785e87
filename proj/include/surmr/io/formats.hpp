#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "surmr/core/quality.hpp"

namespace surmr::io {

// Ladder manifest (JSON):
//   {"ladders": [{"ladder_id": "...", "original_ref": "...", "codec_tag": "...",
//                 "rungs": [{"rung_index": 1, "q_param": 22, "image_ref": "..."}]}]}
// Image refs are resolved relative to the manifest's directory.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<core::QualityLadder> ladders;

  const core::QualityLadder& find(const std::string& ladder_id) const;
  std::filesystem::path resolve(const std::string& ref) const;
};

Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const Manifest& manifest);

// Satisfaction records: ladder_id,rung_index,subject_id,subject_kind,satisfied
std::vector<core::SatisfactionRecord> read_records(const std::filesystem::path& path);
std::string format_records(const std::vector<core::SatisfactionRecord>& records);

// Ratio curves: ladder_id,rung_index,ratio,population_size
std::string format_curves(const std::vector<core::RatioCurve>& curves);

using RungKey = std::pair<std::string, int>;
using LabelMap = std::map<RungKey, double>;

// Reads a per-rung label column from any of the delimited outputs (ratio
// curves, proxy labels, predictions). The first present column among
// `candidates` is used.
LabelMap read_labels(const std::filesystem::path& path, const std::vector<std::string>& candidates);

// Proxy labels: ladder_id,rung_index,sur_hat
std::string format_proxy_labels(const LabelMap& labels);

// Split assignment: ladder_id,split  (split in {train, val, test})
std::map<std::string, std::string> read_split_file(const std::filesystem::path& path);

}  // namespace surmr::io
