#include "surmr/io/checkpoint.hpp"

#include <cstring>

#include <zlib.h>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::io {

namespace {

constexpr char kMagic[8] = {'S', 'U', 'R', 'M', 'R', 'C', 'K', '\0'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::uint32_t crc(std::string_view bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    c = crc32(c, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(c);
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }
  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error("corrupt checkpoint '" + source_ + "': truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const model::Network& net, const CheckpointMeta& meta) {
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t total = 0;
  for (const auto& p : net.parameters()) {
    tensors.push_back({{"name", p.name}, {"shape", p.var->value.shape()}});
    total += p.var->value.size();
  }
  const auto& bb = net.config().backbone;
  const nlohmann::json header{
      {"format", "surmr-checkpoint"},
      {"variant", model::to_string(net.config().variant)},
      {"network", net.config()},
      {"preprocessing",
       {{"input_height", bb.input_height}, {"input_width", bb.input_width}, {"mean", bb.mean},
        {"stddev", bb.stddev}, {"resize", "bilinear, aspect ignored"}}},
      {"init_seed", net.init_seed()},
      {"training", {{"step", meta.step}, {"seed", meta.seed}, {"phase", meta.phase}, {"extra", meta.extra}}},
      {"tensors", tensors}};
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  put<std::uint64_t>(out, total * sizeof(double));
  for (const auto& p : net.parameters()) {
    out.append(reinterpret_cast<const char*>(p.var->value.data()), p.var->value.size() * sizeof(double));
  }
  put<std::uint32_t>(out, crc(out));
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const model::Network& net, const CheckpointMeta& meta) {
  write_text_file(path, serialize_checkpoint(net, meta));
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source,
                            std::optional<model::Variant> expected) {
  Reader r(bytes, source);
  if (r.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw Error("corrupt checkpoint '" + source + "': bad magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version) + " in '" + source + "' (expected " +
                std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = r.get<std::uint64_t>();
  const auto header_text = r.take(header_len);
  const auto payload_len = r.get<std::uint64_t>();
  const auto payload = r.take(payload_len);
  const std::size_t covered = r.pos();
  const auto stored = r.get<std::uint32_t>();
  if (r.pos() != bytes.size()) throw Error("corrupt checkpoint '" + source + "': trailing bytes");
  if (crc(bytes.substr(0, covered)) != stored) throw Error("corrupt checkpoint '" + source + "': checksum mismatch");

  nlohmann::json header;
  model::NetworkConfig config;
  std::uint64_t init_seed = 0;
  CheckpointMeta meta;
  try {
    header = nlohmann::json::parse(header_text);
    config = header.at("network").get<model::NetworkConfig>();
    init_seed = header.at("init_seed").get<std::uint64_t>();
    const auto& t = header.at("training");
    meta.step = t.at("step").get<std::size_t>();
    meta.seed = t.at("seed").get<std::uint64_t>();
    meta.phase = t.at("phase").get<std::string>();
    meta.extra = t.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt checkpoint '" + source + "': bad header: " + e.what());
  }
  if (expected && *expected != config.variant) {
    throw Error("config mismatch: checkpoint '" + source + "' holds variant '" +
                std::string(model::to_string(config.variant)) + "', expected '" +
                std::string(model::to_string(*expected)) + "'");
  }

  model::Network net(config, init_seed);
  const auto& params = net.parameters();
  const auto& table = header.at("tensors");
  if (table.size() != params.size()) {
    throw Error("config mismatch: checkpoint '" + source + "' lists " + std::to_string(table.size()) +
                " tensors, the configured network has " + std::to_string(params.size()));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto name = table[i].at("name").get<std::string>();
    const auto shape = table[i].at("shape").get<nn::Shape>();
    auto& value = params[i].var->value;
    if (name != params[i].name || shape != value.shape()) {
      throw Error("config mismatch: checkpoint tensor '" + name + "' " + nn::shape_string(shape) +
                  " does not match '" + params[i].name + "' " + nn::shape_string(value.shape()));
    }
    const std::size_t n = value.size() * sizeof(double);
    if (offset + n > payload.size()) throw Error("corrupt checkpoint '" + source + "': short parameter data");
    std::memcpy(value.data(), payload.data() + offset, n);
    offset += n;
  }
  if (offset != payload.size()) throw Error("corrupt checkpoint '" + source + "': excess parameter data");
  return {std::move(net), std::move(meta)};
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<model::Variant> expected) {
  const std::string bytes = read_text_file(path);
  return parse_checkpoint(bytes, path.string(), expected);
}

}  // namespace surmr::io
