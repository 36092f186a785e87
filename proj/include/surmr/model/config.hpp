#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace surmr::model {

// Architectures that can be assembled. The first six are the ablation
// matrix; `pretrain_extractor` is the backbone plus a pooled-difference head
// used only for the pre-training phase.
enum class Variant {
  full,
  no_dfrl,
  no_mhaap,
  transformer_fusion,
  mlp_fusion,
  all_features,
  pretrain_extractor,
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
const std::vector<Variant>& ablation_variants();

enum class MixerKind { conv, attention };

struct BackboneConfig {
  std::array<std::size_t, 4> stage_channels{64, 128, 320, 512};
  std::array<std::size_t, 4> stage_depths{3, 3, 9, 3};
  // Token mixers per stage; fixed by the architecture.
  static constexpr std::array<MixerKind, 4> stage_mixers{MixerKind::conv, MixerKind::conv,
                                                         MixerKind::attention, MixerKind::attention};
  std::size_t input_height = 224;
  std::size_t input_width = 224;
  std::size_t attention_head_dim = 32;
  std::size_t sepconv_kernel = 7;
  std::size_t mlp_ratio = 4;
  // Per-channel preprocessing applied to [0,1] RGB.
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> stddev{0.229, 0.224, 0.225};

  void validate() const;
  // Spatial size of stage l (0-based): input / 2^(l+2).
  std::size_t stage_height(std::size_t l) const { return input_height >> (l + 2); }
  std::size_t stage_width(std::size_t l) const { return input_width >> (l + 2); }
  std::size_t total_channels() const;
};

struct MhaapConfig {
  // 0 means "use the stage-3 spatial size".
  std::size_t target_height = 0;
  std::size_t target_width = 0;
  std::size_t queries = 49;
  std::size_t heads = 8;
  std::size_t out_channels = 512;
};

struct MixerConfig {
  std::size_t layers = 4;
  // 0 means the 4x default: 4*(Y+1) and 4*Z.
  std::size_t token_hidden = 0;
  std::size_t channel_hidden = 0;
};

struct NetworkConfig {
  Variant variant = Variant::full;
  BackboneConfig backbone;
  MhaapConfig mhaap;
  MixerConfig mixer;
  std::size_t transformer_layers = 4;
  std::size_t transformer_heads = 8;
  double norm_eps = 1e-5;

  // Derived sizes.
  std::size_t mhaap_height() const;
  std::size_t mhaap_width() const;
  std::size_t concat_channels() const;  // C, tripled for all_features
  std::size_t token_hidden() const;
  std::size_t channel_hidden() const;

  // Throws on any inconsistent combination (C % h, Z < C, widths, ...).
  void validate() const;
  // Non-fatal advisories (for example Y not much smaller than H*W).
  std::vector<std::string> warnings() const;
};

// Compact configuration used by the desk-scale fixtures.
NetworkConfig tiny_config(Variant variant = Variant::full);

void to_json(nlohmann::json& j, const BackboneConfig& c);
void from_json(const nlohmann::json& j, BackboneConfig& c);
void to_json(nlohmann::json& j, const MhaapConfig& c);
void from_json(const nlohmann::json& j, MhaapConfig& c);
void to_json(nlohmann::json& j, const MixerConfig& c);
void from_json(const nlohmann::json& j, MixerConfig& c);
void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

}  // namespace surmr::model
