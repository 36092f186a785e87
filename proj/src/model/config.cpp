#include "surmr/model/config.hpp"

#include <numeric>

#include "surmr/error.hpp"

namespace surmr::model {

namespace {
struct VariantName {
  Variant variant;
  std::string_view name;
};
constexpr std::array<VariantName, 7> kVariantNames{{
    {Variant::full, "full"},
    {Variant::no_dfrl, "no_dfrl"},
    {Variant::no_mhaap, "no_mhaap"},
    {Variant::transformer_fusion, "transformer_fusion"},
    {Variant::mlp_fusion, "mlp_fusion"},
    {Variant::all_features, "all_features"},
    {Variant::pretrain_extractor, "pretrain_extractor"},
}};
}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& vn : kVariantNames)
    if (vn.variant == v) return vn.name;
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& vn : kVariantNames)
    if (vn.name == name) return vn.variant;
  throw Error("unknown variant '" + std::string(name) + "'");
}

const std::vector<Variant>& ablation_variants() {
  static const std::vector<Variant> all{Variant::full,       Variant::no_dfrl,
                                        Variant::no_mhaap,   Variant::transformer_fusion,
                                        Variant::mlp_fusion, Variant::all_features};
  return all;
}

void BackboneConfig::validate() const {
  if (input_height < 32 || input_width < 32 || input_height % 32 || input_width % 32) {
    throw Error("backbone input size must be a positive multiple of 32, got " +
                std::to_string(input_height) + "x" + std::to_string(input_width));
  }
  for (std::size_t l = 0; l < 4; ++l) {
    if (stage_channels[l] == 0) throw Error("backbone stage channels must be positive");
    if (stage_mixers[l] == MixerKind::attention &&
        (attention_head_dim == 0 || stage_channels[l] % attention_head_dim != 0)) {
      throw Error("attention stage " + std::to_string(l + 1) + " channels " +
                  std::to_string(stage_channels[l]) + " not divisible by head dim " +
                  std::to_string(attention_head_dim));
    }
  }
  if (sepconv_kernel % 2 == 0) throw Error("separable conv kernel must be odd");
  if (mlp_ratio == 0) throw Error("backbone mlp ratio must be positive");
  for (double s : stddev)
    if (!(s > 0.0)) throw Error("preprocessing std must be positive");
}

std::size_t BackboneConfig::total_channels() const {
  return std::accumulate(stage_channels.begin(), stage_channels.end(), std::size_t{0});
}

std::size_t NetworkConfig::mhaap_height() const {
  return mhaap.target_height ? mhaap.target_height : backbone.stage_height(2);
}
std::size_t NetworkConfig::mhaap_width() const {
  return mhaap.target_width ? mhaap.target_width : backbone.stage_width(2);
}
std::size_t NetworkConfig::concat_channels() const {
  const std::size_t c = backbone.total_channels();
  return variant == Variant::all_features ? 3 * c : c;
}
std::size_t NetworkConfig::token_hidden() const {
  return mixer.token_hidden ? mixer.token_hidden : 4 * (mhaap.queries + 1);
}
std::size_t NetworkConfig::channel_hidden() const {
  return mixer.channel_hidden ? mixer.channel_hidden : 4 * mhaap.out_channels;
}

void NetworkConfig::validate() const {
  backbone.validate();
  const std::size_t c = concat_channels();
  const std::size_t z = mhaap.out_channels;
  if (mhaap.queries == 0) throw Error("query count Y must be positive");
  if (mhaap.heads == 0 || c % mhaap.heads != 0) {
    throw Error("concat channels C=" + std::to_string(c) + " not divisible by head count h=" +
                std::to_string(mhaap.heads));
  }
  if (z >= c) {
    throw Error("pooled channels Z=" + std::to_string(z) + " must be smaller than C=" +
                std::to_string(c));
  }
  if (z < 4) throw Error("pooled channels Z must be at least 4 for the regression head");
  if (variant == Variant::transformer_fusion &&
      (transformer_heads == 0 || z % transformer_heads != 0)) {
    throw Error("transformer fusion heads must divide Z");
  }
  if (mixer.layers == 0 && variant != Variant::transformer_fusion && variant != Variant::mlp_fusion &&
      variant != Variant::pretrain_extractor) {
    throw Error("mixer layer count must be positive");
  }
  if (mhaap_height() == 0 || mhaap_width() == 0) throw Error("MHAAP target size must be positive");
  if (!(norm_eps > 0.0)) throw Error("normalization epsilon must be positive");
}

std::vector<std::string> NetworkConfig::warnings() const {
  std::vector<std::string> w;
  const std::size_t n = mhaap_height() * mhaap_width();
  if (mhaap.queries * 4 > n) {
    w.push_back("query count Y=" + std::to_string(mhaap.queries) +
                " is not much smaller than token count N=" + std::to_string(n));
  }
  return w;
}

NetworkConfig tiny_config(Variant variant) {
  NetworkConfig c;
  c.variant = variant;
  c.backbone.stage_channels = {4, 8, 16, 32};
  c.backbone.stage_depths = {1, 1, 1, 1};
  c.backbone.input_height = 64;
  c.backbone.input_width = 64;
  c.backbone.attention_head_dim = 8;
  c.backbone.sepconv_kernel = 3;
  c.mhaap.queries = 4;
  c.mhaap.heads = 2;
  c.mhaap.out_channels = 32;
  c.mixer.layers = 4;
  c.transformer_layers = 4;
  c.transformer_heads = 8;
  return c;
}

void to_json(nlohmann::json& j, const BackboneConfig& c) {
  j = nlohmann::json{{"stage_channels", c.stage_channels},
                     {"stage_depths", c.stage_depths},
                     {"stage_mixers", {"conv", "conv", "attention", "attention"}},
                     {"input_height", c.input_height},
                     {"input_width", c.input_width},
                     {"attention_head_dim", c.attention_head_dim},
                     {"sepconv_kernel", c.sepconv_kernel},
                     {"mlp_ratio", c.mlp_ratio},
                     {"mean", c.mean},
                     {"std", c.stddev}};
}

void from_json(const nlohmann::json& j, BackboneConfig& c) {
  const BackboneConfig d;
  c.stage_channels = j.value("stage_channels", d.stage_channels);
  c.stage_depths = j.value("stage_depths", d.stage_depths);
  c.input_height = j.value("input_height", d.input_height);
  c.input_width = j.value("input_width", d.input_width);
  c.attention_head_dim = j.value("attention_head_dim", d.attention_head_dim);
  c.sepconv_kernel = j.value("sepconv_kernel", d.sepconv_kernel);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
  c.mean = j.value("mean", d.mean);
  c.stddev = j.value("std", d.stddev);
  if (j.contains("stage_mixers") &&
      j.at("stage_mixers") != nlohmann::json{"conv", "conv", "attention", "attention"}) {
    throw Error("stage_mixers is fixed to (conv, conv, attention, attention)");
  }
}

void to_json(nlohmann::json& j, const MhaapConfig& c) {
  j = nlohmann::json{{"target_height", c.target_height}, {"target_width", c.target_width},
                     {"queries", c.queries},             {"heads", c.heads},
                     {"out_channels", c.out_channels}};
}

void from_json(const nlohmann::json& j, MhaapConfig& c) {
  const MhaapConfig d;
  c.target_height = j.value("target_height", d.target_height);
  c.target_width = j.value("target_width", d.target_width);
  c.queries = j.value("queries", d.queries);
  c.heads = j.value("heads", d.heads);
  c.out_channels = j.value("out_channels", d.out_channels);
}

void to_json(nlohmann::json& j, const MixerConfig& c) {
  j = nlohmann::json{{"layers", c.layers},
                     {"token_hidden", c.token_hidden},
                     {"channel_hidden", c.channel_hidden}};
}

void from_json(const nlohmann::json& j, MixerConfig& c) {
  const MixerConfig d;
  c.layers = j.value("layers", d.layers);
  c.token_hidden = j.value("token_hidden", d.token_hidden);
  c.channel_hidden = j.value("channel_hidden", d.channel_hidden);
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"variant", std::string(to_string(c.variant))},
                     {"backbone", c.backbone},
                     {"mhaap", c.mhaap},
                     {"mixer", c.mixer},
                     {"transformer_layers", c.transformer_layers},
                     {"transformer_heads", c.transformer_heads},
                     {"norm_eps", c.norm_eps}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  const NetworkConfig d;
  c.variant = parse_variant(j.value("variant", std::string("full")));
  c.backbone = j.value("backbone", d.backbone);
  c.mhaap = j.value("mhaap", d.mhaap);
  c.mixer = j.value("mixer", d.mixer);
  c.transformer_layers = j.value("transformer_layers", d.transformer_layers);
  c.transformer_heads = j.value("transformer_heads", d.transformer_heads);
  c.norm_eps = j.value("norm_eps", d.norm_eps);
}

}  // namespace surmr::model
