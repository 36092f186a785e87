// Serial reference kernels vs the OpenMP ones, plus one full forward/backward
// of the tiny network. Thread count is the second range argument.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "surmr/model/loss.hpp"
#include "surmr/model/network.hpp"
#include "surmr/nn/kernels.hpp"
#include "surmr/train/trainer.hpp"

using namespace surmr;
namespace k = surmr::nn::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_MatmulSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : st) {
    k::serial::matmul(a.data(), b.data(), c.data(), n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(n * n * n));
}

void BM_MatmulOmp(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  train::configure_threads(static_cast<std::size_t>(st.range(1)));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : st) {
    k::matmul(a.data(), b.data(), c.data(), n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(n * n * n));
  train::configure_threads(0);
}

k::ConvGeometry conv_geometry(std::size_t hw) { return {16, hw, hw, 32, 3, 1, 1}; }

void BM_ConvSerial(benchmark::State& st) {
  const auto g = conv_geometry(static_cast<std::size_t>(st.range(0)));
  const auto x = random_vec(g.in_channels * g.in_height * g.in_width, 3);
  const auto w = random_vec(g.out_channels * g.in_channels * g.kernel * g.kernel, 4);
  std::vector<double> y(g.out_channels * g.out_height() * g.out_width());
  for (auto _ : st) {
    k::serial::conv2d_forward(g, x.data(), w.data(), nullptr, y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_ConvOmp(benchmark::State& st) {
  const auto g = conv_geometry(static_cast<std::size_t>(st.range(0)));
  train::configure_threads(static_cast<std::size_t>(st.range(1)));
  const auto x = random_vec(g.in_channels * g.in_height * g.in_width, 3);
  const auto w = random_vec(g.out_channels * g.in_channels * g.kernel * g.kernel, 4);
  std::vector<double> y(g.out_channels * g.out_height() * g.out_width());
  for (auto _ : st) {
    k::conv2d_forward(g, x.data(), w.data(), nullptr, y.data());
    benchmark::DoNotOptimize(y.data());
  }
  train::configure_threads(0);
}

void BM_TinyForwardBackward(benchmark::State& st) {
  auto cfg = model::tiny_config();
  model::Network net(cfg, 1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  nn::Tensor a({3, 64, 64}), b({3, 64, 64});
  for (auto& v : a.storage()) v = d(rng);
  for (auto& v : b.storage()) v = d(rng);
  for (auto _ : st) {
    const auto loss = model::joint_loss(net.forward(nn::constant(a), nn::constant(b)), model::Target{0.3, 0.6}, {});
    nn::backward(loss);
  }
}

}  // namespace

BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_MatmulOmp)->Args({64, 1})->Args({64, 4})->Args({256, 1})->Args({256, 4});
BENCHMARK(BM_ConvSerial)->Arg(32)->Arg(64);
BENCHMARK(BM_ConvOmp)->Args({32, 1})->Args({32, 4})->Args({64, 1})->Args({64, 4});
BENCHMARK(BM_TinyForwardBackward)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
