#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "surmr/error.hpp"
#include "surmr/model/loss.hpp"
#include "surmr/model/network.hpp"

using namespace surmr;
using namespace surmr::model;
using nn::Tensor;

namespace {

double gelu(double x) { return 0.5 * x * (1 + std::erf(x / std::sqrt(2.0))); }
double sigm(double x) { return 1 / (1 + std::exp(-x)); }

Tensor random_tensor(nn::Shape shape, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0, sd);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = d(rng);
  return t;
}

void randomize(const nn::ParamList& params, std::mt19937_64& rng, double sd = 0.5) {
  std::normal_distribution<double> d(0, sd);
  for (const auto& p : params)
    for (auto& v : p.var->value.storage()) v = d(rng);
}

template <class M>
nn::ParamList params_of(const M& m) {
  nn::ParamList out;
  m.collect("m", out);
  return out;
}

// Row-wise layer norm over the last axis with gamma/beta, plain loops.
std::vector<std::vector<double>> layer_norm_rows(const std::vector<std::vector<double>>& x, const Tensor& g,
                                                 const Tensor& b, double eps) {
  auto out = x;
  for (std::size_t r = 0; r < x.size(); ++r) {
    double mean = 0, var = 0;
    for (double v : x[r]) mean += v;
    mean /= x[r].size();
    for (double v : x[r]) var += (v - mean) * (v - mean);
    var /= x[r].size();
    for (std::size_t c = 0; c < x[r].size(); ++c) out[r][c] = (x[r][c] - mean) / std::sqrt(var + eps) * g[c] + b[c];
  }
  return out;
}

std::vector<std::vector<double>> affine(const std::vector<std::vector<double>>& x, const nn::Linear& l) {
  const auto& w = l.weight->value;
  std::vector<std::vector<double>> out(x.size(), std::vector<double>(w.dim(1)));
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t o = 0; o < w.dim(1); ++o) {
      double acc = l.bias ? l.bias->value[o] : 0.0;
      for (std::size_t i = 0; i < w.dim(0); ++i) acc += x[r][i] * w.at(i, o);
      out[r][o] = acc;
    }
  return out;
}

std::vector<std::vector<double>> rows_of(const Tensor& t) {
  std::vector<std::vector<double>> out(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t r = 0; r < t.dim(0); ++r)
    for (std::size_t c = 0; c < t.dim(1); ++c) out[r][c] = t.at(r, c);
  return out;
}

NetworkConfig micro(Variant v = Variant::full) {
  auto c = tiny_config(v);
  c.backbone.input_height = c.backbone.input_width = 32;
  c.mixer.layers = 1;
  c.transformer_layers = 1;
  return c;
}

Tensor random_image(const BackboneConfig& b, std::mt19937_64& rng) {
  return random_tensor({3, b.input_height, b.input_width}, rng);
}

}  // namespace

// ---------------------------------------------------------------- backbone

TEST(Backbone, StageShapesAt224) {
  BackboneConfig cfg;
  cfg.stage_depths = {1, 1, 1, 1};
  nn::Rng rng(1);
  Backbone bb(cfg, 1e-5, rng);
  std::mt19937_64 r(2);
  nn::NoGradGuard ng;
  const auto f = bb.forward(nn::constant(random_image(cfg, r)));
  EXPECT_EQ(f[0]->value.shape(), (nn::Shape{64, 56, 56}));
  EXPECT_EQ(f[1]->value.shape(), (nn::Shape{128, 28, 28}));
  EXPECT_EQ(f[2]->value.shape(), (nn::Shape{320, 14, 14}));
  EXPECT_EQ(f[3]->value.shape(), (nn::Shape{512, 7, 7}));
}

TEST(Backbone, TinyForwardIsFiniteAndSiamese) {
  const auto cfg = tiny_config();
  Network net(cfg, 5);
  std::mt19937_64 r(3);
  const auto img = random_image(cfg.backbone, r);
  nn::NoGradGuard ng;
  const auto t = net.trace(nn::constant(img), nn::constant(img));
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_TRUE(t.original[l]->value.all_finite());
    EXPECT_EQ(t.original[l]->value, t.compressed[l]->value);
    for (double v : t.diffs[l]->value.storage()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_THROW(net.trace(nn::constant(img), nn::constant(Tensor({3, 32, 32}))), Error);
}

TEST(Backbone, SwapNegatesDiffs) {
  const auto cfg = micro();
  Network net(cfg, 6);
  std::mt19937_64 r(4);
  const auto a = random_image(cfg.backbone, r), b = random_image(cfg.backbone, r);
  nn::NoGradGuard ng;
  const auto ab = net.trace(nn::constant(a), nn::constant(b));
  const auto ba = net.trace(nn::constant(b), nn::constant(a));
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& x = ab.diffs[l]->value;
    const auto& y = ba.diffs[l]->value;
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], -y[i]);
    // And each diff is exactly the elementwise subtraction of the pyramids.
    for (std::size_t i = 0; i < x.size(); ++i)
      EXPECT_EQ(x[i], ab.original[l]->value[i] - ab.compressed[l]->value[i]);
  }
}

TEST(DiffFeatures, ZeroCompressedGivesOriginal) {
  std::mt19937_64 r(5);
  FeaturePyramid a, z;
  for (std::size_t l = 0; l < 4; ++l) {
    a[l] = nn::constant(random_tensor({2, 3, 3}, r));
    z[l] = nn::constant(Tensor({2, 3, 3}));
  }
  const auto d = diff_features(a, z);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(d[l]->value, a[l]->value);
  z[2] = nn::constant(Tensor({2, 2, 3}));
  EXPECT_THROW(diff_features(a, z), Error);
}

// -------------------------------------------------------------------- DFRL

TEST(Dfrl, ZeroInitIsIdentity) {
  nn::Rng rng(7);
  DfrlStage s(5, rng);
  std::mt19937_64 r(8);
  const auto x = random_tensor({5, 6, 4}, r);
  EXPECT_EQ(s(nn::constant(x))->value, x);
}

TEST(Dfrl, ZeroInputZeroBiasGivesZero) {
  nn::Rng rng(7);
  DfrlStage s(3, rng);
  std::mt19937_64 r(9);
  randomize(params_of(s), r);
  for (auto* c : {&s.conv1, &s.conv2, &s.conv3}) c->bias->value.fill(0.0);
  const auto y = s(nn::constant(Tensor({3, 4, 4})));
  for (double v : y->value.storage()) EXPECT_EQ(v, 0.0);
}

TEST(Dfrl, ScalarOracle) {
  nn::Rng rng(1);
  DfrlStage s;
  s.conv1 = nn::Conv2d(1, 1, 1, 1, 0, rng);
  s.conv2 = nn::Conv2d(1, 1, 1, 1, 0, rng);
  s.conv3 = nn::Conv2d(1, 1, 1, 1, 0, rng);
  const double w1 = 0.7, b1 = -0.2, w2 = -1.3, b2 = 0.4, w3 = 0.9, b3 = 0.05, x = 0.6;
  s.conv1.weight->value[0] = w1;
  s.conv1.bias->value[0] = b1;
  s.conv2.weight->value[0] = w2;
  s.conv2.bias->value[0] = b2;
  s.conv3.weight->value[0] = w3;
  s.conv3.bias->value[0] = b3;
  const double expect = x + (w3 * gelu(w2 * gelu(w1 * x + b1) + b2) + b3);
  EXPECT_NEAR(s(nn::constant(Tensor({1, 1, 1}, {x})))->value[0], expect, 1e-15);
}

// ------------------------------------------------------------------- MHAAP

TEST(Mhaap, SingleTokenEachRowIsPooledValue) {
  nn::Rng rng(11);
  Mhaap m(4, {0, 0, 3, 2, 2}, 1, 1, 1e-5, rng);
  std::mt19937_64 r(12);
  randomize(params_of(m), r);
  const auto tok = random_tensor({1, 4}, r);
  const auto out = m.pool_tokens(nn::constant(tok))->value;
  const auto v = affine(affine(layer_norm_rows(rows_of(tok), m.norm.gamma->value, m.norm.beta->value, 1e-5), m.value), m.pool);
  ASSERT_EQ(out.shape(), (nn::Shape{3, 2}));
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t z = 0; z < 2; ++z) EXPECT_NEAR(out.at(q, z), v[0][z], 1e-7);
}

TEST(Mhaap, MatchesBruteForceAttention) {
  for (std::size_t heads : {1u, 2u}) {
    nn::Rng rng(20 + heads);
    const std::size_t y = 2, n = 3, c = 4, z = 2;
    Mhaap m(c, {0, 0, y, heads, z}, 1, n, 1e-5, rng);
    std::mt19937_64 r(30 + heads);
    randomize(params_of(m), r);
    const auto tok = random_tensor({n, c}, r);
    std::vector<nn::Var> attn;
    const auto out = m.pool_tokens(nn::constant(tok), &attn)->value;

    const auto f = layer_norm_rows(rows_of(tok), m.norm.gamma->value, m.norm.beta->value, 1e-5);
    const auto k = affine(f, m.key), v = affine(f, m.value);
    const auto& q = m.query->value;
    const std::size_t d = c / heads;
    std::vector<std::vector<double>> cat(y, std::vector<double>(c, 0.0));
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t qi = 0; qi < y; ++qi) {
        std::vector<double> s(n);
        double mx = -1e300, tot = 0;
        for (std::size_t t = 0; t < n; ++t) {
          double acc = 0;
          for (std::size_t j = 0; j < d; ++j) acc += q.at(qi, h * d + j) * k[t][h * d + j];
          s[t] = acc / std::sqrt(static_cast<double>(c) / heads);
          mx = std::max(mx, s[t]);
        }
        for (auto& e : s) tot += e = std::exp(e - mx);
        for (std::size_t t = 0; t < n; ++t) {
          EXPECT_NEAR(attn[h]->value.at(qi, t), s[t] / tot, 1e-13);
          for (std::size_t j = 0; j < d; ++j) cat[qi][h * d + j] += s[t] / tot * v[t][h * d + j];
        }
      }
    const auto expect = affine(cat, m.pool);
    for (std::size_t qi = 0; qi < y; ++qi)
      for (std::size_t j = 0; j < z; ++j) EXPECT_NEAR(out.at(qi, j), expect[qi][j], 1e-12);
  }
}

TEST(Mhaap, AttentionRowsSumToOne) {
  nn::Rng rng(40);
  Mhaap m(8, {0, 0, 5, 4, 4}, 3, 3, 1e-5, rng);
  std::mt19937_64 r(41);
  randomize(params_of(m), r, 2.0);
  std::vector<nn::Var> attn;
  m.pool_tokens(nn::constant(random_tensor({9, 8}, r, 3.0)), &attn);
  ASSERT_EQ(attn.size(), 4u);
  for (const auto& a : attn)
    for (std::size_t q = 0; q < 5; ++q) {
      double s = 0;
      for (std::size_t t = 0; t < 9; ++t) s += a->value.at(q, t);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Mhaap, TokenPermutationInvariance) {
  std::mt19937_64 r(50);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t heads = 1 + r() % 3, c = heads * (1 + r() % 3), n = 1 + r() % 12;
    nn::Rng rng(r());
    Mhaap m(c, {0, 0, 1 + r() % 4, heads, 1 + r() % 4}, 1, n, 1e-5, rng);
    randomize(params_of(m), r);
    const auto tok = random_tensor({n, c}, r);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), r);
    Tensor shuffled({n, c});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) shuffled.at(i, j) = tok.at(perm[i], j);
    const auto a = m.pool_tokens(nn::constant(tok))->value, b = m.pool_tokens(nn::constant(shuffled))->value;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-5);
  }
}

TEST(Mhaap, HeadsMustDivideChannels) {
  nn::Rng rng(1);
  EXPECT_THROW(Mhaap(6, {0, 0, 2, 4, 2}, 1, 1, 1e-5, rng), Error);
  auto cfg = tiny_config();
  cfg.mhaap.heads = 7;
  EXPECT_THROW(Network(cfg, 1), Error);
}

// ------------------------------------------------------------------- mixer

TEST(Mixer, ZeroSecondLayersGiveIdentity) {
  nn::Rng rng(60);
  MixerFusion mf(3, 4, 2, 16, 16, 1e-5, rng);
  std::mt19937_64 r(61);
  nn::ParamList ps;
  mf.collect("m", ps);
  randomize(ps, r);
  for (auto& b : mf.blocks) {
    b.token_fc2.zero();
    b.channel_fc2.zero();
  }
  const auto out = mf(nn::constant(random_tensor({3, 4}, r)))->value;
  EXPECT_EQ(out, mf.reg_token->value);
}

TEST(Mixer, RowOrderMatters) {
  nn::Rng rng(62);
  MixerFusion mf(4, 4, 1, 20, 16, 1e-5, rng);
  std::mt19937_64 r(63);
  const auto x = random_tensor({4, 4}, r);
  Tensor y = x;
  for (std::size_t j = 0; j < 4; ++j) std::swap(y.at(0, j), y.at(3, j));
  const auto a = mf(nn::constant(x))->value, b = mf(nn::constant(y))->value;
  double diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(Mixer, ScalarOracleOneLayer) {
  nn::Rng rng(64);
  MixerFusion mf(1, 2, 1, 3, 3, 1e-5, rng);
  std::mt19937_64 r(65);
  nn::ParamList ps;
  mf.collect("m", ps);
  randomize(ps, r);
  const auto x = random_tensor({1, 2}, r);
  const auto& blk = mf.blocks[0];
  // S = [T_reg; F]
  std::vector<std::vector<double>> s{{mf.reg_token->value[0], mf.reg_token->value[1]}, {x[0], x[1]}};
  auto n = layer_norm_rows(s, blk.token_norm.gamma->value, blk.token_norm.beta->value, 1e-5);
  // Token MLP along the token axis, one channel column at a time.
  std::vector<std::vector<double>> u = s;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    std::vector<std::vector<double>> col{{n[0][ch], n[1][ch]}};
    auto h = affine(col, blk.token_fc1);
    for (auto& v : h[0]) v = gelu(v);
    const auto o = affine(h, blk.token_fc2);
    u[0][ch] += o[0][0];
    u[1][ch] += o[0][1];
  }
  auto cn = layer_norm_rows(u, blk.channel_norm.gamma->value, blk.channel_norm.beta->value, 1e-5);
  auto h = affine(cn, blk.channel_fc1);
  for (auto& row : h)
    for (auto& v : row) v = gelu(v);
  const auto o = affine(h, blk.channel_fc2);
  const auto out = mf(nn::constant(x))->value;
  EXPECT_NEAR(out[0], u[0][0] + o[0][0], 1e-13);
  EXPECT_NEAR(out[1], u[0][1] + o[0][1], 1e-13);
}

// -------------------------------------------------------------------- head

TEST(Head, ZeroWeightsGiveHalf) {
  nn::Rng rng(70);
  RegressionHead h(8, 8, rng);
  for (auto* l : {&h.fc1, &h.fc2, &h.fc3}) l->zero();
  std::mt19937_64 r(71);
  const auto out = h(nn::constant(random_tensor({1, 8}, r)))->value;
  EXPECT_EQ(out[0], 0.5);
  EXPECT_EQ(out[1], 0.5);
}

TEST(Head, SaturatedBias) {
  nn::Rng rng(72);
  RegressionHead h(8, 8, rng);
  for (auto* l : {&h.fc1, &h.fc2, &h.fc3}) l->zero();
  h.fc3.bias->value[0] = 10;
  h.fc3.bias->value[1] = -10;
  std::mt19937_64 r(73);
  const auto out = h(nn::constant(random_tensor({1, 8}, r)))->value;
  EXPECT_NEAR(out[0], 1.0, 1e-4);
  EXPECT_NEAR(out[1], 0.0, 1e-4);
  EXPECT_LT(out[0], 1.0);
  EXPECT_GT(out[1], 0.0);
}

TEST(Head, ScalarOracle) {
  nn::Rng rng(74);
  RegressionHead h(4, 8, rng);
  std::mt19937_64 r(75);
  randomize(params_of(h), r, 0.3);
  const auto x = random_tensor({1, 4}, r);
  auto a = affine(rows_of(x), h.fc1);
  for (auto& v : a[0]) v = gelu(v);
  auto b = affine(a, h.fc2);
  for (auto& v : b[0]) v = gelu(v);
  const auto c = affine(b, h.fc3);
  const auto out = h(nn::constant(x))->value;
  EXPECT_NEAR(out[0], sigm(c[0][0]), 1e-14);
  EXPECT_NEAR(out[1], sigm(c[0][1]), 1e-14);
  EXPECT_EQ(h.fc1.out_features(), 4u);
  EXPECT_EQ(h.fc2.out_features(), 2u);
}

// -------------------------------------------------------------------- loss

TEST(JointLoss, HandCases) {
  LossWeights w;
  EXPECT_EQ(joint_loss({0.3, 0.8}, {0.3, 0.8}, w), 0.0);
  EXPECT_EQ(joint_loss({0.5, 0.5}, {1.0, 0.0}, w), 0.5);
  LossWeights sur_only{0.5, 0.5, true, false};
  EXPECT_NEAR(joint_loss({0.3, 0.9}, {0.7, std::nullopt}, sur_only), 0.2, 1e-15);
  LossWeights none{0.5, 0.5, false, false};
  EXPECT_THROW(joint_loss({0.3, 0.9}, {0.7, 0.1}, none), Error);
  EXPECT_THROW(joint_loss({0.3, 0.9}, {std::nullopt, 0.1}, w), Error);
}

TEST(JointLoss, NonNegativeZeroIffEqual) {
  std::mt19937_64 r(80);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const Prediction p{u(r), u(r)};
    const Target t{u(r), u(r)};
    const LossWeights w{0.5, 0.5, (i % 3) != 0, (i % 3) != 1};
    const double l = joint_loss(p, t, w);
    EXPECT_GE(l, 0.0);
    EXPECT_EQ(joint_loss(Prediction{w.sur_mask ? *t.sur : p.sur, w.smr_mask ? *t.smr : p.smr}, t, w), 0.0);
  }
}

TEST(JointLoss, MaskedTermHasZeroGradient) {
  auto pred = nn::parameter(Tensor({1, 2}, {0.2, 0.9}));
  const auto l = joint_loss(pred, Target{0.7, 0.1}, LossWeights{0.5, 0.5, true, false});
  EXPECT_NEAR(l->value[0], 0.25, 1e-15);
  nn::backward(l);
  EXPECT_EQ(pred->grad[0], -0.5);
  EXPECT_EQ(pred->grad[1], 0.0);
}

TEST(JointLoss, BatchMean) {
  const std::vector<Prediction> p{{0.5, 0.5}, {0.3, 0.8}};
  const std::vector<Target> t{{1.0, 0.0}, {0.3, 0.8}};
  EXPECT_EQ(batch_loss(p, t, LossWeights{}), 0.25);
}

// ---------------------------------------------------------------- variants

TEST(Variants, Structure) {
  const auto full = build_variant(Variant::full, micro(), 1);
  EXPECT_TRUE(full.has_prefix("dfrl.stage4"));
  EXPECT_TRUE(full.has_prefix("mhaap.query"));
  EXPECT_TRUE(full.has_prefix("mixer.reg_token"));
  EXPECT_TRUE(full.has_prefix("head.fc3"));
  EXPECT_EQ(build_variant(Variant::full, tiny_config(), 1).mixer->blocks.size(), 4u);

  const auto nd = build_variant(Variant::no_dfrl, micro(), 1);
  EXPECT_FALSE(nd.has_prefix("dfrl"));
  const auto nm = build_variant(Variant::no_mhaap, micro(), 1);
  EXPECT_FALSE(nm.has_prefix("mhaap"));
  EXPECT_TRUE(nm.has_prefix("gap_pool.proj"));
  const auto tf = build_variant(Variant::transformer_fusion, micro(), 1);
  EXPECT_TRUE(tf.has_prefix("transformer"));
  EXPECT_FALSE(tf.has_prefix("mixer"));
  const auto mf = build_variant(Variant::mlp_fusion, micro(), 1);
  EXPECT_TRUE(mf.has_prefix("mlp_fusion.fc"));
  EXPECT_EQ(mf.mlp->fc.in_features(), micro().mhaap.queries * micro().mhaap.out_channels);
  const auto af = build_variant(Variant::all_features, micro(), 1);
  EXPECT_EQ(af.mhaap->channels(), 3 * micro().backbone.total_channels());
  EXPECT_EQ(full.mhaap->channels(), micro().backbone.total_channels());
  const auto pe = build_variant(Variant::pretrain_extractor, micro(), 1);
  EXPECT_TRUE(pe.has_prefix("extractor_head"));
  EXPECT_FALSE(pe.has_prefix("mhaap"));
  EXPECT_THROW(parse_variant("bogus"), Error);
  for (auto v : ablation_variants()) EXPECT_EQ(parse_variant(to_string(v)), v);
}

TEST(Variants, NoDfrlPassesDiffsThrough) {
  const auto cfg = micro(Variant::no_dfrl);
  Network net(cfg, 3);
  std::mt19937_64 r(90);
  nn::NoGradGuard ng;
  const auto t = net.trace(nn::constant(random_image(cfg.backbone, r)), nn::constant(random_image(cfg.backbone, r)));
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(t.refined[l]->value, t.diffs[l]->value);
}

TEST(Variants, AllPredictInsideUnitSquare) {
  std::mt19937_64 r(91);
  const auto b = micro().backbone;
  const auto a = random_image(b, r), c = random_image(b, r);
  for (auto v : {Variant::full, Variant::no_dfrl, Variant::no_mhaap, Variant::transformer_fusion,
                 Variant::mlp_fusion, Variant::all_features, Variant::pretrain_extractor}) {
    Network net(micro(v), 4);
    const auto p = net.predict(a, c);
    EXPECT_GT(p.sur, 0.0);
    EXPECT_LT(p.sur, 1.0);
    EXPECT_GT(p.smr, 0.0);
    EXPECT_LT(p.smr, 1.0);
    // Same seed, same parameters, same prediction.
    const auto q = Network(micro(v), 4).predict(a, c);
    EXPECT_EQ(p.sur, q.sur);
    EXPECT_EQ(p.smr, q.smr);
  }
}

TEST(Config, DerivedSizesAndJson) {
  auto cfg = tiny_config();
  EXPECT_EQ(cfg.concat_channels(), 60u);
  EXPECT_EQ(cfg.mhaap_height(), 4u);  // stage-3 size at 64 input
  EXPECT_EQ(cfg.token_hidden(), 4 * (cfg.mhaap.queries + 1));
  EXPECT_EQ(cfg.channel_hidden(), 4 * cfg.mhaap.out_channels);
  cfg.mhaap.target_height = cfg.mhaap.target_width = 2;
  const nlohmann::json j = cfg;
  EXPECT_EQ(nlohmann::json(j.get<NetworkConfig>()), j);
  auto bad = tiny_config();
  bad.mhaap.out_channels = 64;  // Z must be below C
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Preprocess, ResizeAndNormalize) {
  BackboneConfig b;
  b.input_height = b.input_width = 8;
  const Tensor ones({3, 4, 4}, 1.0);
  const auto p = preprocess(ones, b);
  EXPECT_EQ(p.shape(), (nn::Shape{3, 8, 8}));
  EXPECT_NEAR(p.at(1, 3, 3), (1.0 - b.mean[1]) / b.stddev[1], 1e-15);
  EXPECT_THROW(preprocess(Tensor({1, 4, 4}), b), Error);
}
