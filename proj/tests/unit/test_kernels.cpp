#include <gtest/gtest.h>
#include <omp.h>

#include <random>

#include "surmr/nn/autograd.hpp"
#include "surmr/nn/kernels.hpp"

using namespace surmr::nn;
namespace k = surmr::nn::kernels;

namespace {

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

struct ThreadScope {
  explicit ThreadScope(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadScope() { omp_set_num_threads(saved); }
  int saved;
};

double naive_conv(const k::ConvGeometry& g, const std::vector<double>& x, const std::vector<double>& w,
                  const std::vector<double>& b, std::size_t co, std::size_t oy, std::size_t ox) {
  double acc = b.empty() ? 0.0 : b[co];
  for (std::size_t ci = 0; ci < g.in_channels; ++ci)
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
        if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_height) || ix >= static_cast<long>(g.in_width)) continue;
        acc += x[(ci * g.in_height + iy) * g.in_width + ix] * w[((co * g.in_channels + ci) * g.kernel + ky) * g.kernel + kx];
      }
  return acc;
}

}  // namespace

TEST(Kernels, MatmulMatchesNaiveAndSerial) {
  std::mt19937_64 rng(1);
  const std::size_t m = 13, kk = 7, n = 9;
  const auto a = rand_vec(m * kk, rng), b = rand_vec(kk * n, rng);
  std::vector<double> c(m * n), s(m * n);
  ThreadScope t(4);
  k::matmul(a.data(), b.data(), c.data(), m, kk, n, false);
  k::serial::matmul(a.data(), b.data(), s.data(), m, kk, n, false);
  EXPECT_EQ(c, s);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < kk; ++p) acc += a[i * kk + p] * b[p * n + j];
      EXPECT_NEAR(c[i * n + j], acc, 1e-12);
    }
  // Accumulate mode adds onto the existing output.
  auto c2 = c;
  k::matmul(a.data(), b.data(), c2.data(), m, kk, n, true);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c2[i], 2 * c[i], 1e-12);
}

TEST(Kernels, TransposedMatmulsMatchSerial) {
  std::mt19937_64 rng(2);
  const std::size_t m = 6, kk = 11, n = 5;
  const auto at = rand_vec(kk * m, rng), b = rand_vec(kk * n, rng), bt = rand_vec(n * kk, rng), a = rand_vec(m * kk, rng);
  ThreadScope t(3);
  std::vector<double> c(m * n, 1.0), s(m * n, 1.0);
  k::matmul_tn(at.data(), b.data(), c.data(), m, kk, n, true);
  k::serial::matmul_tn(at.data(), b.data(), s.data(), m, kk, n, true);
  EXPECT_EQ(c, s);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 1.0;
      for (std::size_t p = 0; p < kk; ++p) acc += at[p * m + i] * b[p * n + j];
      EXPECT_NEAR(c[i * n + j], acc, 1e-12);
    }
  std::vector<double> d(m * n), e(m * n);
  k::matmul_nt(a.data(), bt.data(), d.data(), m, kk, n, false);
  k::serial::matmul_nt(a.data(), bt.data(), e.data(), m, kk, n, false);
  EXPECT_EQ(d, e);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::size_t p = 0; p < kk; ++p) acc += a[i * kk + p] * bt[j * kk + p];
      EXPECT_NEAR(d[i * n + j], acc, 1e-12);
    }
}

class ConvKernels : public ::testing::TestWithParam<std::tuple<std::size_t, std::size_t, std::size_t>> {};

TEST_P(ConvKernels, ForwardBackwardMatchSerialAndNaive) {
  const auto [kernel, stride, pad] = GetParam();
  k::ConvGeometry g{3, 9, 8, 4, kernel, stride, pad};
  std::mt19937_64 rng(kernel * 100 + stride * 10 + pad);
  const auto x = rand_vec(3 * 9 * 8, rng), w = rand_vec(4 * 3 * kernel * kernel, rng), b = rand_vec(4, rng);
  const std::size_t ny = g.out_height() * g.out_width() * 4;
  ThreadScope t(4);
  std::vector<double> y(ny), ys(ny);
  k::conv2d_forward(g, x.data(), w.data(), b.data(), y.data());
  k::serial::conv2d_forward(g, x.data(), w.data(), b.data(), ys.data());
  EXPECT_EQ(y, ys);
  for (std::size_t co = 0; co < 4; ++co)
    for (std::size_t oy = 0; oy < g.out_height(); ++oy)
      for (std::size_t ox = 0; ox < g.out_width(); ++ox)
        EXPECT_NEAR(y[(co * g.out_height() + oy) * g.out_width() + ox], naive_conv(g, x, w, b, co, oy, ox), 1e-12);

  const auto dy = rand_vec(ny, rng);
  std::vector<double> dx(x.size()), dxs(x.size()), dw(w.size()), dws(w.size()), db(4), dbs(4);
  k::conv2d_backward_input(g, w.data(), dy.data(), dx.data());
  k::serial::conv2d_backward_input(g, w.data(), dy.data(), dxs.data());
  k::conv2d_backward_weight(g, x.data(), dy.data(), dw.data(), db.data());
  k::serial::conv2d_backward_weight(g, x.data(), dy.data(), dws.data(), dbs.data());
  EXPECT_EQ(dx, dxs);
  EXPECT_EQ(dw, dws);
  EXPECT_EQ(db, dbs);
  // Adjoint identity: <dy, conv(x)> - bias term == <dx, x> == <dw, w>.
  double lhs = 0, rx = 0, rw = 0;
  std::vector<double> y0(ny);
  k::serial::conv2d_forward(g, x.data(), w.data(), nullptr, y0.data());
  for (std::size_t i = 0; i < ny; ++i) lhs += dy[i] * y0[i];
  for (std::size_t i = 0; i < x.size(); ++i) rx += dx[i] * x[i];
  for (std::size_t i = 0; i < w.size(); ++i) rw += dw[i] * w[i];
  EXPECT_NEAR(lhs, rx, 1e-9);
  EXPECT_NEAR(lhs, rw, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Geometries, ConvKernels,
                         ::testing::Values(std::make_tuple(1u, 1u, 0u), std::make_tuple(3u, 1u, 1u),
                                           std::make_tuple(4u, 4u, 0u), std::make_tuple(3u, 2u, 1u),
                                           std::make_tuple(7u, 1u, 3u)));

TEST(Kernels, DepthwiseMatchesSerialAndNaive) {
  k::ConvGeometry g{5, 7, 6, 5, 3, 1, 1};
  std::mt19937_64 rng(8);
  const auto x = rand_vec(5 * 7 * 6, rng), w = rand_vec(5 * 9, rng), b = rand_vec(5, rng), dy = rand_vec(5 * 7 * 6, rng);
  ThreadScope t(4);
  std::vector<double> y(x.size()), ys(x.size());
  k::depthwise_forward(g, x.data(), w.data(), b.data(), y.data());
  k::serial::depthwise_forward(g, x.data(), w.data(), b.data(), ys.data());
  EXPECT_EQ(y, ys);
  for (std::size_t c = 0; c < 5; ++c)
    for (std::size_t oy = 0; oy < 7; ++oy)
      for (std::size_t ox = 0; ox < 6; ++ox) {
        double acc = b[c];
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const int iy = static_cast<int>(oy) + ky - 1, ix = static_cast<int>(ox) + kx - 1;
            if (iy < 0 || ix < 0 || iy >= 7 || ix >= 6) continue;
            acc += x[(c * 7 + iy) * 6 + ix] * w[c * 9 + ky * 3 + kx];
          }
        EXPECT_NEAR(y[(c * 7 + oy) * 6 + ox], acc, 1e-12);
      }
  std::vector<double> dx(x.size()), dxs(x.size()), dw(w.size()), dws(w.size()), db(5), dbs(5);
  k::depthwise_backward_input(g, w.data(), dy.data(), dx.data());
  k::serial::depthwise_backward_input(g, w.data(), dy.data(), dxs.data());
  k::depthwise_backward_weight(g, x.data(), dy.data(), dw.data(), db.data());
  k::serial::depthwise_backward_weight(g, x.data(), dy.data(), dws.data(), dbs.data());
  EXPECT_EQ(dx, dxs);
  EXPECT_EQ(dw, dws);
  EXPECT_EQ(db, dbs);
}

TEST(Autograd, NoGradGuardSkipsRecording) {
  auto p = parameter(Tensor({2}, {1.0, 2.0}));
  {
    NoGradGuard g;
    EXPECT_FALSE(grad_enabled());
    auto y = ops::scale(p, 3.0);
    EXPECT_TRUE(y->inputs.empty());
  }
  EXPECT_TRUE(grad_enabled());
  auto y = ops::dot_const(ops::scale(p, 3.0), Tensor({2}, {1.0, 1.0}));
  backward(y);
  EXPECT_EQ(p->grad, Tensor({2}, {3.0, 3.0}));
}

TEST(Autograd, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(4);
  auto x = constant(Tensor({5, 9}, rand_vec(45, rng)));
  const auto s = ops::softmax_rows(x);
  for (std::size_t r = 0; r < 5; ++r) {
    double acc = 0;
    for (std::size_t c = 0; c < 9; ++c) acc += s->value.at(r, c);
    EXPECT_NEAR(acc, 1.0, 1e-12);
  }
}

TEST(Autograd, BilinearResizeIdentityAndConstant) {
  std::mt19937_64 rng(5);
  const Tensor t({2, 4, 3}, rand_vec(24, rng));
  EXPECT_EQ(bilinear_resize(t, 4, 3), t);
  const Tensor c({1, 3, 5}, 0.25);
  const auto r = bilinear_resize(c, 7, 2);
  for (double v : r.storage()) EXPECT_NEAR(v, 0.25, 1e-15);
}
