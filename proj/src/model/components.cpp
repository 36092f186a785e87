#include "surmr/model/components.hpp"

#include <cmath>

#include "surmr/error.hpp"

namespace surmr::model {

namespace ops = nn::ops;

// ---------------------------------------------------------------- backbone

Backbone::Backbone(const BackboneConfig& config, double eps, nn::Rng& rng) : config_(config) {
  config_.validate();
  std::size_t in_ch = 3;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t c = config_.stage_channels[l];
    Stage st;
    if (l == 0) {
      st.down = nn::Conv2d(in_ch, c, 7, 4, 2, rng);
      st.down_norm = nn::LayerNorm(c, eps);
    } else {
      st.down_norm = nn::LayerNorm(in_ch, eps);
      st.down = nn::Conv2d(in_ch, c, 3, 2, 1, rng);
    }
    for (std::size_t d = 0; d < config_.stage_depths[l]; ++d) {
      Block b;
      b.kind = BackboneConfig::stage_mixers[l];
      b.norm1 = nn::LayerNorm(c, eps);
      b.norm2 = nn::LayerNorm(c, eps);
      if (b.kind == MixerKind::conv) {
        b.pw_expand = nn::Linear(c, 2 * c, rng);
        b.depthwise = nn::DepthwiseConv2d(2 * c, config_.sepconv_kernel, rng);
        b.pw_project = nn::Linear(2 * c, c, rng);
      } else {
        b.heads = c / config_.attention_head_dim;
        b.qkv = nn::Linear(c, 3 * c, rng, false);
        b.proj = nn::Linear(c, c, rng);
      }
      b.fc1 = nn::Linear(c, config_.mlp_ratio * c, rng);
      b.fc2 = nn::Linear(config_.mlp_ratio * c, c, rng);
      st.blocks.push_back(std::move(b));
    }
    stages_.push_back(std::move(st));
    in_ch = c;
  }
}

Var Backbone::run_block(const Block& b, const Var& tokens, std::size_t h, std::size_t w) const {
  Var n = b.norm1(tokens);
  Var mixed;
  if (b.kind == MixerKind::conv) {
    Var e = ops::gelu(b.pw_expand(n));
    Var spatial = ops::tokens_to_chw(e, h, w);
    Var dw = ops::chw_to_tokens(b.depthwise(spatial));
    mixed = b.pw_project(dw);
  } else {
    const std::size_t c = tokens->value.dim(1);
    Var qkv = b.qkv(n);
    Var q = ops::slice_cols(qkv, 0, c);
    Var k = ops::slice_cols(qkv, c, c);
    Var v = ops::slice_cols(qkv, 2 * c, c);
    const double scale = 1.0 / std::sqrt(static_cast<double>(c / b.heads));
    mixed = b.proj(nn::multi_head_attention(q, k, v, b.heads, scale));
  }
  Var t = ops::add(tokens, mixed);
  Var mlp = b.fc2(ops::gelu(b.fc1(b.norm2(t))));
  return ops::add(t, mlp);
}

FeaturePyramid Backbone::forward(const Var& image) const {
  nn::require_shape(image->value, {3, config_.input_height, config_.input_width}, "backbone input");
  FeaturePyramid out;
  Var x = image;  // (C, H, W)
  for (std::size_t l = 0; l < 4; ++l) {
    const Stage& st = stages_[l];
    Var tokens;
    if (l == 0) {
      tokens = st.down_norm(ops::chw_to_tokens(st.down(x)));
    } else {
      const std::size_t ph = x->value.dim(1), pw = x->value.dim(2);
      Var normed = ops::tokens_to_chw(st.down_norm(ops::chw_to_tokens(x)), ph, pw);
      tokens = ops::chw_to_tokens(st.down(normed));
    }
    const std::size_t h = config_.stage_height(l), w = config_.stage_width(l);
    for (const auto& b : st.blocks) tokens = run_block(b, tokens, h, w);
    x = ops::tokens_to_chw(tokens, h, w);
    out[l] = x;
  }
  return out;
}

void Backbone::collect(const std::string& prefix, nn::ParamList& out) const {
  for (std::size_t l = 0; l < stages_.size(); ++l) {
    const Stage& st = stages_[l];
    const std::string sp = prefix + ".stage" + std::to_string(l + 1);
    st.down_norm.collect(sp + (l == 0 ? ".stem_norm" : ".down_norm"), out);
    st.down.collect(sp + (l == 0 ? ".stem" : ".down"), out);
    for (std::size_t d = 0; d < st.blocks.size(); ++d) {
      const Block& b = st.blocks[d];
      const std::string bp = sp + ".block" + std::to_string(d);
      b.norm1.collect(bp + ".norm1", out);
      if (b.kind == MixerKind::conv) {
        b.pw_expand.collect(bp + ".sepconv.pw_expand", out);
        b.depthwise.collect(bp + ".sepconv.depthwise", out);
        b.pw_project.collect(bp + ".sepconv.pw_project", out);
      } else {
        b.qkv.collect(bp + ".attn.qkv", out);
        b.proj.collect(bp + ".attn.proj", out);
      }
      b.norm2.collect(bp + ".norm2", out);
      b.fc1.collect(bp + ".mlp.fc1", out);
      b.fc2.collect(bp + ".mlp.fc2", out);
    }
  }
}

std::vector<Var> diff_features(const FeaturePyramid& f0, const FeaturePyramid& fq) {
  std::vector<Var> out;
  out.reserve(4);
  for (std::size_t l = 0; l < 4; ++l) {
    if (f0[l]->value.shape() != fq[l]->value.shape()) {
      throw Error("diff_features: stage " + std::to_string(l + 1) + " shapes differ " +
                  nn::shape_string(f0[l]->value.shape()) + " vs " +
                  nn::shape_string(fq[l]->value.shape()));
    }
    out.push_back(ops::sub(f0[l], fq[l]));
  }
  return out;
}

// -------------------------------------------------------------------- DFRL

DfrlStage::DfrlStage(std::size_t channels, nn::Rng& rng)
    : conv1(channels, channels, 3, 1, 1, rng),
      conv2(channels, channels, 3, 1, 1, rng),
      conv3(channels, channels, 3, 1, 1, rng) {
  conv3.zero();
}

Var DfrlStage::operator()(const Var& diff) const {
  return ops::add(diff, conv3(ops::gelu(conv2(ops::gelu(conv1(diff))))));
}

void DfrlStage::collect(const std::string& prefix, nn::ParamList& out) const {
  conv1.collect(prefix + ".conv1", out);
  conv2.collect(prefix + ".conv2", out);
  conv3.collect(prefix + ".conv3", out);
}

// ------------------------------------------------------------------- MHAAP

Var interpolate_and_concat(const std::vector<Var>& stages, std::size_t height, std::size_t width) {
  std::vector<Var> resized;
  resized.reserve(stages.size());
  for (const auto& s : stages) resized.push_back(ops::bilinear_resize(s, height, width));
  return ops::concat(resized);
}

Mhaap::Mhaap(std::size_t channels, const MhaapConfig& config, std::size_t height, std::size_t width,
             double eps, nn::Rng& rng)
    : query(nn::parameter(nn::normal_init({config.queries, channels}, 0.02, rng))),
      norm(channels, eps),
      key(channels, channels, rng),
      value(channels, channels, rng),
      pool(channels, config.out_channels, rng),
      channels_(channels),
      heads_(config.heads),
      height_(height),
      width_(width) {
  if (heads_ == 0 || channels % heads_ != 0) {
    throw Error("MHAAP: C=" + std::to_string(channels) + " not divisible by h=" + std::to_string(heads_));
  }
}

Var Mhaap::pool_tokens(const Var& tokens, std::vector<Var>* attention) const {
  Var f = norm(tokens);
  Var k = key(f);
  Var v = value(f);
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels_) / static_cast<double>(heads_));
  Var attended = nn::multi_head_attention(query, k, v, heads_, scale, attention);
  return pool(attended);
}

Var Mhaap::operator()(const std::vector<Var>& stages) const {
  Var cat = interpolate_and_concat(stages, height_, width_);
  if (cat->value.dim(0) != channels_) {
    throw Error("MHAAP: expected " + std::to_string(channels_) + " concatenated channels, got " +
                std::to_string(cat->value.dim(0)));
  }
  return pool_tokens(ops::chw_to_tokens(cat));
}

void Mhaap::collect(const std::string& prefix, nn::ParamList& out) const {
  out.push_back({prefix + ".query", query});
  norm.collect(prefix + ".norm", out);
  key.collect(prefix + ".key", out);
  value.collect(prefix + ".value", out);
  pool.collect(prefix + ".pool", out);
}

GapPooling::GapPooling(std::size_t channels, std::size_t out_channels, std::size_t queries,
                       std::size_t height, std::size_t width, nn::Rng& rng)
    : proj(channels, out_channels, rng), queries_(queries), height_(height), width_(width) {}

Var GapPooling::operator()(const std::vector<Var>& stages) const {
  Var tokens = ops::chw_to_tokens(interpolate_and_concat(stages, height_, width_));
  return ops::broadcast_rows(ops::mean_rows(proj(tokens)), queries_);
}

void GapPooling::collect(const std::string& prefix, nn::ParamList& out) const {
  proj.collect(prefix + ".proj", out);
}

// ------------------------------------------------------------------- mixer

MixerBlock::MixerBlock(std::size_t tokens, std::size_t channels, std::size_t token_hidden,
                       std::size_t channel_hidden, double eps, nn::Rng& rng)
    : token_norm(channels, eps),
      channel_norm(channels, eps),
      token_fc1(tokens, token_hidden, rng),
      token_fc2(token_hidden, tokens, rng),
      channel_fc1(channels, channel_hidden, rng),
      channel_fc2(channel_hidden, channels, rng) {}

Var MixerBlock::operator()(const Var& s) const {
  // Token mixing acts along the token axis of the normalized, transposed input.
  Var nt = ops::transpose(token_norm(s));                        // (Z, T)
  Var mixed = token_fc2(ops::gelu(token_fc1(nt)));                // (Z, T)
  Var u = ops::add(s, ops::transpose(mixed));                     // (T, Z)
  Var ch = channel_fc2(ops::gelu(channel_fc1(channel_norm(u))));  // (T, Z)
  return ops::add(u, ch);
}

void MixerBlock::collect(const std::string& prefix, nn::ParamList& out) const {
  token_norm.collect(prefix + ".token_norm", out);
  token_fc1.collect(prefix + ".token_fc1", out);
  token_fc2.collect(prefix + ".token_fc2", out);
  channel_norm.collect(prefix + ".channel_norm", out);
  channel_fc1.collect(prefix + ".channel_fc1", out);
  channel_fc2.collect(prefix + ".channel_fc2", out);
}

MixerFusion::MixerFusion(std::size_t queries, std::size_t channels, std::size_t layers,
                         std::size_t token_hidden, std::size_t channel_hidden, double eps,
                         nn::Rng& rng)
    : reg_token(nn::parameter(nn::normal_init({1, channels}, 0.02, rng))) {
  for (std::size_t i = 0; i < layers; ++i)
    blocks.emplace_back(queries + 1, channels, token_hidden, channel_hidden, eps, rng);
}

Var MixerFusion::operator()(const Var& pooled) const {
  if (pooled->value.dim(1) != reg_token->value.dim(1)) throw Error("mixer: channel width mismatch");
  Var s = ops::concat({reg_token, pooled});
  for (const auto& b : blocks) s = b(s);
  return ops::slice_rows(s, 0, 1);
}

void MixerFusion::collect(const std::string& prefix, nn::ParamList& out) const {
  out.push_back({prefix + ".reg_token", reg_token});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect(prefix + ".block" + std::to_string(i), out);
}

TransformerFusion::TransformerFusion(std::size_t channels, std::size_t layers, std::size_t heads,
                                     double eps, nn::Rng& rng)
    : reg_token(nn::parameter(nn::normal_init({1, channels}, 0.02, rng))), heads_(heads) {
  for (std::size_t i = 0; i < layers; ++i) {
    Layer l;
    l.norm1 = nn::LayerNorm(channels, eps);
    l.qkv = nn::Linear(channels, 3 * channels, rng);
    l.proj = nn::Linear(channels, channels, rng);
    l.norm2 = nn::LayerNorm(channels, eps);
    l.fc1 = nn::Linear(channels, 4 * channels, rng);
    l.fc2 = nn::Linear(4 * channels, channels, rng);
    layers_.push_back(std::move(l));
  }
}

Var TransformerFusion::operator()(const Var& pooled) const {
  Var s = ops::concat({reg_token, pooled});
  const std::size_t c = s->value.dim(1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(c / heads_));
  for (const auto& l : layers_) {
    Var qkv = l.qkv(l.norm1(s));
    Var attn = nn::multi_head_attention(ops::slice_cols(qkv, 0, c), ops::slice_cols(qkv, c, c),
                                        ops::slice_cols(qkv, 2 * c, c), heads_, scale);
    s = ops::add(s, l.proj(attn));
    s = ops::add(s, l.fc2(ops::gelu(l.fc1(l.norm2(s)))));
  }
  return ops::slice_rows(s, 0, 1);
}

void TransformerFusion::collect(const std::string& prefix, nn::ParamList& out) const {
  out.push_back({prefix + ".reg_token", reg_token});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string lp = prefix + ".layer" + std::to_string(i);
    layers_[i].norm1.collect(lp + ".norm1", out);
    layers_[i].qkv.collect(lp + ".attn.qkv", out);
    layers_[i].proj.collect(lp + ".attn.proj", out);
    layers_[i].norm2.collect(lp + ".norm2", out);
    layers_[i].fc1.collect(lp + ".mlp.fc1", out);
    layers_[i].fc2.collect(lp + ".mlp.fc2", out);
  }
}

MlpFusion::MlpFusion(std::size_t queries, std::size_t channels, nn::Rng& rng)
    : fc(queries * channels, channels, rng) {}

Var MlpFusion::operator()(const Var& pooled) const {
  return fc(ops::reshape(pooled, {1, pooled->value.size()}));
}

void MlpFusion::collect(const std::string& prefix, nn::ParamList& out) const {
  fc.collect(prefix + ".fc", out);
}

// -------------------------------------------------------------------- head

RegressionHead::RegressionHead(std::size_t in, std::size_t z, nn::Rng& rng)
    : fc1(in, z / 2, rng), fc2(z / 2, z / 4, rng), fc3(z / 4, 2, rng) {}

Var RegressionHead::operator()(const Var& token) const {
  return ops::sigmoid(fc3(ops::gelu(fc2(ops::gelu(fc1(token))))));
}

void RegressionHead::collect(const std::string& prefix, nn::ParamList& out) const {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
  fc3.collect(prefix + ".fc3", out);
}

}  // namespace surmr::model
