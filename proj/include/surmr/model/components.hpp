#pragma once

#include <array>
#include <vector>

#include "surmr/model/config.hpp"
#include "surmr/nn/layers.hpp"

namespace surmr::model {

using nn::Var;

// Per-stage feature maps, each (c_l, H_l, W_l).
using FeaturePyramid = std::array<Var, 4>;

// Preprocessed image tensor (3, H, W) expected by the backbone.
using ImageTensor = nn::Tensor;

// Four-stage hybrid backbone: two stages of separable-convolution token
// mixing followed by two stages of self-attention, each block wrapped in the
// usual norm/residual/MLP structure.
class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneConfig& config, double eps, nn::Rng& rng);

  FeaturePyramid forward(const Var& image) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;
  const BackboneConfig& config() const { return config_; }

 private:
  struct Block {
    MixerKind kind = MixerKind::conv;
    nn::LayerNorm norm1, norm2;
    // conv mixer
    nn::Linear pw_expand, pw_project;
    nn::DepthwiseConv2d depthwise;
    // attention mixer
    nn::Linear qkv, proj;
    std::size_t heads = 1;
    // channel MLP
    nn::Linear fc1, fc2;
  };
  struct Stage {
    nn::LayerNorm down_norm;  // unused for the stem stage
    nn::Conv2d down;
    std::vector<Block> blocks;
  };

  Var run_block(const Block& b, const Var& tokens, std::size_t h, std::size_t w) const;

  BackboneConfig config_;
  std::vector<Stage> stages_;
};

// Elementwise F0 - Fq per stage.
std::vector<Var> diff_features(const FeaturePyramid& f0, const FeaturePyramid& fq);

// Residual refinement x + Conv3(GELU(Conv2(GELU(Conv1(x))))), 3x3 convs,
// channel- and spatial-preserving. Conv3 starts at zero.
class DfrlStage {
 public:
  DfrlStage() = default;
  DfrlStage(std::size_t channels, nn::Rng& rng);

  Var operator()(const Var& diff) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  nn::Conv2d conv1, conv2, conv3;
};

// Resample every stage to (height, width) and concatenate on channels.
Var interpolate_and_concat(const std::vector<Var>& stages, std::size_t height, std::size_t width);

// Learnable-query multi-head attention pooling over spatial tokens followed
// by a linear channel pooling C -> Z.
class Mhaap {
 public:
  Mhaap() = default;
  Mhaap(std::size_t channels, const MhaapConfig& config, std::size_t height, std::size_t width,
        double eps, nn::Rng& rng);

  // stages: per-stage (c_l, H_l, W_l) maps; returns (Y, Z).
  Var operator()(const std::vector<Var>& stages) const;
  // tokens: (N, C) already concatenated; returns (Y, Z).
  Var pool_tokens(const Var& tokens, std::vector<Var>* attention = nullptr) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  std::size_t channels() const { return channels_; }

  Var query;  // (Y, C)
  nn::LayerNorm norm;
  nn::Linear key, value, pool;

 private:
  std::size_t channels_ = 0;
  std::size_t heads_ = 1;
  std::size_t height_ = 1, width_ = 1;
};

// Replacement for MHAAP in the no_mhaap ablation: 1x1 conv C -> Z, global
// average pooling, broadcast to Y tokens.
class GapPooling {
 public:
  GapPooling() = default;
  GapPooling(std::size_t channels, std::size_t out_channels, std::size_t queries,
             std::size_t height, std::size_t width, nn::Rng& rng);

  Var operator()(const std::vector<Var>& stages) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  nn::Linear proj;

 private:
  std::size_t queries_ = 1;
  std::size_t height_ = 1, width_ = 1;
};

// One token-mixing + channel-mixing residual block over (T, Z).
class MixerBlock {
 public:
  MixerBlock() = default;
  MixerBlock(std::size_t tokens, std::size_t channels, std::size_t token_hidden,
             std::size_t channel_hidden, double eps, nn::Rng& rng);

  Var operator()(const Var& s) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  nn::LayerNorm token_norm, channel_norm;
  nn::Linear token_fc1, token_fc2;      // W1, W2 over the token axis
  nn::Linear channel_fc1, channel_fc2;  // W3, W4 over the channel axis
};

// Regression token prepended to the pooled tokens, mixed by `layers` mixer
// blocks; returns the regression token's final (1, Z) state.
class MixerFusion {
 public:
  MixerFusion() = default;
  MixerFusion(std::size_t queries, std::size_t channels, std::size_t layers,
              std::size_t token_hidden, std::size_t channel_hidden, double eps, nn::Rng& rng);

  Var operator()(const Var& pooled) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  Var reg_token;  // (1, Z)
  std::vector<MixerBlock> blocks;
};

// Pre-norm transformer encoder stack used by the transformer_fusion ablation.
class TransformerFusion {
 public:
  TransformerFusion() = default;
  TransformerFusion(std::size_t channels, std::size_t layers, std::size_t heads, double eps,
                    nn::Rng& rng);

  Var operator()(const Var& pooled) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  Var reg_token;

 private:
  struct Layer {
    nn::LayerNorm norm1, norm2;
    nn::Linear qkv, proj, fc1, fc2;
  };
  std::vector<Layer> layers_;
  std::size_t heads_ = 1;
};

// Single affine layer over the flattened (Y*Z) tokens back to Z.
class MlpFusion {
 public:
  MlpFusion() = default;
  MlpFusion(std::size_t queries, std::size_t channels, nn::Rng& rng);

  Var operator()(const Var& pooled) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  nn::Linear fc;
};

// in -> Z/2 -> Z/4 -> 2 with GELU between layers and a sigmoid output.
class RegressionHead {
 public:
  RegressionHead() = default;
  RegressionHead(std::size_t in, std::size_t z, nn::Rng& rng);

  // token: (1, in) -> (1, 2) = (sur, smr)
  Var operator()(const Var& token) const;
  void collect(const std::string& prefix, nn::ParamList& out) const;

  nn::Linear fc1, fc2, fc3;
};

}  // namespace surmr::model
