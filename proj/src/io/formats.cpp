#include "surmr/io/formats.hpp"

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::io {

using nlohmann::json;

const core::QualityLadder& Manifest::find(const std::string& ladder_id) const {
  for (const auto& l : ladders)
    if (l.ladder_id == ladder_id) return l;
  throw Error("manifest has no ladder '" + ladder_id + "'");
}

std::filesystem::path Manifest::resolve(const std::string& ref) const {
  std::filesystem::path p(ref);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest read_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error("'" + path.string() + "': invalid JSON: " + e.what());
  }
  Manifest m;
  m.base_dir = path.parent_path();
  if (!doc.is_object() || !doc.contains("ladders") || !doc["ladders"].is_array()) {
    throw Error("'" + path.string() + "': manifest must be an object with a 'ladders' array");
  }
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& entry : doc["ladders"]) {
    const std::string where = path.string() + ": ladders[" + std::to_string(index++) + "]";
    try {
      core::QualityLadder l;
      l.ladder_id = entry.at("ladder_id").get<std::string>();
      l.original_ref = entry.at("original_ref").get<std::string>();
      l.codec_tag = entry.value("codec_tag", std::string());
      for (const auto& r : entry.at("rungs")) {
        l.rungs.push_back({r.at("rung_index").get<int>(), r.at("q_param").get<long long>(),
                           r.at("image_ref").get<std::string>()});
      }
      l.normalize_and_validate();
      if (!seen.insert(l.ladder_id).second) throw Error("duplicate ladder_id '" + l.ladder_id + "'");
      m.ladders.push_back(std::move(l));
    } catch (const json::exception& e) {
      throw Error(where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return m;
}

std::string format_manifest(const Manifest& manifest) {
  json ladders = json::array();
  for (const auto& l : manifest.ladders) {
    json rungs = json::array();
    for (const auto& r : l.rungs)
      rungs.push_back({{"rung_index", r.rung_index}, {"q_param", r.q_param}, {"image_ref", r.image_ref}});
    ladders.push_back({{"ladder_id", l.ladder_id},
                       {"original_ref", l.original_ref},
                       {"codec_tag", l.codec_tag},
                       {"rungs", rungs}});
  }
  return json{{"ladders", ladders}}.dump(2) + "\n";
}

std::vector<core::SatisfactionRecord> read_records(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path, {"ladder_id", "rung_index", "subject_id", "subject_kind", "satisfied"});
  std::vector<core::SatisfactionRecord> out;
  std::set<std::tuple<std::string, int, std::string>> keys;
  for (const auto& row : t.rows()) {
    core::SatisfactionRecord r;
    r.ladder_id = t.field(row, "ladder_id");
    r.rung_index = static_cast<int>(t.integer(row, "rung_index"));
    r.subject_id = t.field(row, "subject_id");
    try {
      r.subject_kind = core::parse_subject_kind(t.field(row, "subject_kind"));
    } catch (const Error& e) {
      t.fail(row, e.what());
    }
    const std::string& s = t.field(row, "satisfied");
    if (s != "0" && s != "1") t.fail(row, "satisfied must be 0 or 1, got '" + s + "'");
    r.satisfied = s == "1";
    if (!keys.insert({r.ladder_id, r.rung_index, r.subject_id}).second) {
      t.fail(row, "duplicate record for (" + r.ladder_id + ", " + std::to_string(r.rung_index) + ", " +
                      r.subject_id + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_records(const std::vector<core::SatisfactionRecord>& records) {
  std::ostringstream ss;
  CsvWriter w(ss, {"ladder_id", "rung_index", "subject_id", "subject_kind", "satisfied"});
  for (const auto& r : records) {
    w.row({r.ladder_id, std::to_string(r.rung_index), r.subject_id, std::string(core::to_string(r.subject_kind)),
           r.satisfied ? "1" : "0"});
  }
  return ss.str();
}

std::string format_curves(const std::vector<core::RatioCurve>& curves) {
  std::ostringstream ss;
  CsvWriter w(ss, {"ladder_id", "rung_index", "ratio", "population_size"});
  for (const auto& c : curves) {
    for (const auto& p : c.values) {
      w.row({c.ladder_id, std::to_string(p.rung_index), format_real(p.ratio.value()),
             std::to_string(c.population_size)});
    }
  }
  return ss.str();
}

LabelMap read_labels(const std::filesystem::path& path, const std::vector<std::string>& candidates) {
  auto t = CsvTable::read(path, {"ladder_id", "rung_index"});
  std::string column;
  for (const auto& c : candidates) {
    if (t.has_column(c)) {
      column = c;
      break;
    }
  }
  if (column.empty()) {
    std::string names;
    for (const auto& c : candidates) names += (names.empty() ? "" : ", ") + c;
    throw Error(path.string() + ":1: none of the label columns {" + names + "} present");
  }
  LabelMap out;
  for (const auto& row : t.rows()) {
    RungKey key{t.field(row, "ladder_id"), static_cast<int>(t.integer(row, "rung_index"))};
    const double v = t.number(row, column);
    if (!(v >= 0.0 && v <= 1.0)) t.fail(row, "label " + column + " outside [0, 1]");
    if (!out.emplace(key, v).second) t.fail(row, "duplicate entry for (" + key.first + ", " + std::to_string(key.second) + ")");
  }
  return out;
}

std::string format_proxy_labels(const LabelMap& labels) {
  std::ostringstream ss;
  CsvWriter w(ss, {"ladder_id", "rung_index", "sur_hat"});
  for (const auto& [key, v] : labels) w.row({key.first, std::to_string(key.second), format_real(v)});
  return ss.str();
}

std::map<std::string, std::string> read_split_file(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path, {"ladder_id", "split"});
  std::map<std::string, std::string> out;
  for (const auto& row : t.rows()) {
    const std::string& split = t.field(row, "split");
    if (split != "train" && split != "val" && split != "test") t.fail(row, "unknown split '" + split + "'");
    if (!out.emplace(t.field(row, "ladder_id"), split).second) t.fail(row, "ladder assigned twice");
  }
  return out;
}

}  // namespace surmr::io
