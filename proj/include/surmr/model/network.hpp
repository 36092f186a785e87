#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "surmr/model/components.hpp"

namespace surmr::model {

struct Prediction {
  double sur = 0.5;
  double smr = 0.5;
};

// Every intermediate of one forward pass, for probes and tests.
struct ForwardTrace {
  FeaturePyramid original;
  FeaturePyramid compressed;
  std::vector<Var> diffs;    // F_delta per stage
  std::vector<Var> refined;  // after DFRL (== diffs for no_dfrl)
  Var pooled;                // (Y, Z), absent for pretrain_extractor
  Var fused;                 // token fed to the head
  Var output;                // (1, 2) sigmoid outputs
};

// The assembled predictor for one architecture variant. Parameters are
// created once at construction from `seed`; forward passes build fresh graphs
// over them so a const Network can be shared by concurrent readers.
class Network {
 public:
  Network(NetworkConfig config, std::uint64_t seed);
  // Copies would alias the parameter tensors.
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  const NetworkConfig& config() const { return config_; }
  std::uint64_t init_seed() const { return seed_; }
  const nn::ParamList& parameters() const { return params_; }
  std::size_t parameter_count() const { return nn::parameter_count(params_); }
  // Parameter by hierarchical name; null when absent.
  Var find(const std::string& name) const;
  bool has_prefix(const std::string& prefix) const;

  ForwardTrace trace(const Var& original, const Var& compressed) const;
  Var forward(const Var& original, const Var& compressed) const;
  Prediction predict(const ImageTensor& original, const ImageTensor& compressed) const;

  Backbone backbone;
  std::vector<DfrlStage> dfrl;
  std::optional<Mhaap> mhaap;
  std::optional<GapPooling> gap;
  std::optional<MixerFusion> mixer;
  std::optional<TransformerFusion> transformer;
  std::optional<MlpFusion> mlp;
  RegressionHead head;

 private:
  NetworkConfig config_;
  std::uint64_t seed_;
  nn::ParamList params_;
};

// Assemble the named variant on top of the shared base configuration.
Network build_variant(Variant variant, const NetworkConfig& base, std::uint64_t seed);

// Preprocess an image tensor of shape (3, H, W) holding [0,1] RGB: resize to
// the configured input size (aspect ignored) and apply mean/std per channel.
ImageTensor preprocess(const nn::Tensor& rgb01, const BackboneConfig& config);

}  // namespace surmr::model
