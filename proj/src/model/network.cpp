#include "surmr/model/network.hpp"

#include "surmr/error.hpp"

namespace surmr::model {

namespace ops = nn::ops;

Network::Network(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  nn::Rng rng(seed);
  const double eps = config_.norm_eps;
  const std::size_t z = config_.mhaap.out_channels;
  const std::size_t y = config_.mhaap.queries;
  const std::size_t c = config_.concat_channels();
  const std::size_t th = config_.mhaap_height(), tw = config_.mhaap_width();

  backbone = Backbone(config_.backbone, eps, rng);
  const Variant v = config_.variant;
  if (v != Variant::no_dfrl && v != Variant::pretrain_extractor) {
    for (std::size_t l = 0; l < 4; ++l) dfrl.emplace_back(config_.backbone.stage_channels[l], rng);
  }
  if (v == Variant::pretrain_extractor) {
    head = RegressionHead(config_.backbone.total_channels(), z, rng);
  } else {
    if (v == Variant::no_mhaap) {
      gap = GapPooling(c, z, y, th, tw, rng);
    } else {
      mhaap = Mhaap(c, config_.mhaap, th, tw, eps, rng);
    }
    if (v == Variant::transformer_fusion) {
      transformer = TransformerFusion(z, config_.transformer_layers, config_.transformer_heads, eps, rng);
    } else if (v == Variant::mlp_fusion) {
      mlp = MlpFusion(y, z, rng);
    } else {
      mixer = MixerFusion(y, z, config_.mixer.layers, config_.token_hidden(), config_.channel_hidden(),
                          eps, rng);
    }
    head = RegressionHead(z, z, rng);
  }

  backbone.collect("backbone", params_);
  for (std::size_t l = 0; l < dfrl.size(); ++l) dfrl[l].collect("dfrl.stage" + std::to_string(l + 1), params_);
  if (mhaap) mhaap->collect("mhaap", params_);
  if (gap) gap->collect("gap_pool", params_);
  if (mixer) mixer->collect("mixer", params_);
  if (transformer) transformer->collect("transformer", params_);
  if (mlp) mlp->collect("mlp_fusion", params_);
  head.collect(v == Variant::pretrain_extractor ? "extractor_head" : "head", params_);
}

Var Network::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.var;
  return nullptr;
}

bool Network::has_prefix(const std::string& prefix) const {
  for (const auto& p : params_)
    if (p.name.rfind(prefix, 0) == 0) return true;
  return false;
}

ForwardTrace Network::trace(const Var& original, const Var& compressed) const {
  if (original->value.shape() != compressed->value.shape()) {
    throw Error("original and compressed inputs differ in size: " +
                nn::shape_string(original->value.shape()) + " vs " +
                nn::shape_string(compressed->value.shape()));
  }
  ForwardTrace t;
  t.original = backbone.forward(original);
  t.compressed = backbone.forward(compressed);
  t.diffs = diff_features(t.original, t.compressed);
  if (dfrl.empty()) {
    t.refined = t.diffs;
  } else {
    for (std::size_t l = 0; l < 4; ++l) t.refined.push_back(dfrl[l](t.diffs[l]));
  }

  if (config_.variant == Variant::pretrain_extractor) {
    std::vector<Var> pooled;
    for (const auto& d : t.refined) pooled.push_back(ops::mean_rows(ops::chw_to_tokens(d)));
    t.fused = ops::concat_cols(pooled);
    t.output = head(t.fused);
    return t;
  }

  std::vector<Var> stages = t.refined;
  if (config_.variant == Variant::all_features) {
    for (std::size_t l = 0; l < 4; ++l)
      stages[l] = ops::concat({t.original[l], t.compressed[l], t.refined[l]});
  }
  t.pooled = mhaap ? (*mhaap)(stages) : (*gap)(stages);
  if (mixer) {
    t.fused = (*mixer)(t.pooled);
  } else if (transformer) {
    t.fused = (*transformer)(t.pooled);
  } else {
    t.fused = (*mlp)(t.pooled);
  }
  t.output = head(t.fused);
  return t;
}

Var Network::forward(const Var& original, const Var& compressed) const {
  return trace(original, compressed).output;
}

Prediction Network::predict(const ImageTensor& original, const ImageTensor& compressed) const {
  nn::NoGradGuard guard;
  Var out = forward(nn::constant(original), nn::constant(compressed));
  return {out->value[0], out->value[1]};
}

Network build_variant(Variant variant, const NetworkConfig& base, std::uint64_t seed) {
  NetworkConfig cfg = base;
  cfg.variant = variant;
  return Network(std::move(cfg), seed);
}

ImageTensor preprocess(const nn::Tensor& rgb01, const BackboneConfig& config) {
  if (rgb01.rank() != 3 || rgb01.dim(0) != 3) {
    throw Error("preprocess: expected a (3, H, W) tensor, got " + nn::shape_string(rgb01.shape()));
  }
  nn::Tensor img = (rgb01.dim(1) == config.input_height && rgb01.dim(2) == config.input_width)
                       ? rgb01
                       : nn::bilinear_resize(rgb01, config.input_height, config.input_width);
  const std::size_t plane = config.input_height * config.input_width;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      double& v = img[c * plane + i];
      v = (v - config.mean[c]) / config.stddev[c];
    }
  }
  return img;
}

}  // namespace surmr::model
