#include <cstddef>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "surmr/nn/kernels.hpp"

namespace surmr::nn::kernels {

using std::ptrdiff_t;
using std::size_t;

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr size_t kMinParallelWork = size_t{1} << 16;

inline ptrdiff_t in_coord(size_t o, size_t stride, size_t k, size_t pad) {
  return static_cast<ptrdiff_t>(o * stride + k) - static_cast<ptrdiff_t>(pad);
}
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
            bool accumulate) {
  const auto rows = static_cast<ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
  for (ptrdiff_t i = 0; i < rows; ++i) {
    double* crow = c + i * n;
    if (!accumulate) std::memset(crow, 0, sizeof(double) * n);
    for (size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
               bool accumulate) {
  const auto rows = static_cast<ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
  for (ptrdiff_t i = 0; i < rows; ++i) {
    double* crow = c + i * n;
    if (!accumulate) std::memset(crow, 0, sizeof(double) * n);
    for (size_t p = 0; p < k; ++p) {
      const double av = a[p * m + i];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
               bool accumulate) {
  const auto rows = static_cast<ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
  for (ptrdiff_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double acc = accumulate ? c[i * n + j] : 0.0;
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
  }
}

void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto co_count = static_cast<ptrdiff_t>(g.out_channels);
  const size_t work = g.out_channels * oh * ow * g.in_channels * kk * kk;
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t co = 0; co < co_count; ++co) {
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        double acc = b ? b[co] : 0.0;
        for (size_t ci = 0; ci < g.in_channels; ++ci) {
          const double* wk = w + ((co * g.in_channels + ci) * kk) * kk;
          const double* xc = x + ci * g.in_height * g.in_width;
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
              if (ix < 0 || ix >= W) continue;
              acc += wk[ky * kk + kx] * xc[iy * W + ix];
            }
          }
        }
        y[(co * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, const double* w, const double* dy, double* dx) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto ci_count = static_cast<ptrdiff_t>(g.in_channels);
  const size_t work = g.out_channels * oh * ow * g.in_channels * kk * kk;
  // Partitioned by input channel: each dx element still sees contributions in
  // (co, oy, ox, ky, kx) order, matching the serial scatter.
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t ci = 0; ci < ci_count; ++ci) {
    double* dxc = dx + ci * g.in_height * g.in_width;
    for (size_t co = 0; co < g.out_channels; ++co) {
      const double* wk = w + ((co * g.in_channels + ci) * kk) * kk;
      for (size_t oy = 0; oy < oh; ++oy) {
        for (size_t ox = 0; ox < ow; ++ox) {
          const double go = dy[(co * oh + oy) * ow + ox];
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
              if (ix < 0 || ix >= W) continue;
              dxc[iy * W + ix] += wk[ky * kk + kx] * go;
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw,
                            double* db) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto co_count = static_cast<ptrdiff_t>(g.out_channels);
  const size_t work = g.out_channels * oh * ow * g.in_channels * kk * kk;
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t co = 0; co < co_count; ++co) {
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(co * oh + oy) * ow + ox];
        if (db) db[co] += go;
        for (size_t ci = 0; ci < g.in_channels; ++ci) {
          double* dwk = dw + ((co * g.in_channels + ci) * kk) * kk;
          const double* xc = x + ci * g.in_height * g.in_width;
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
              if (ix < 0 || ix >= W) continue;
              dwk[ky * kk + kx] += go * xc[iy * W + ix];
            }
          }
        }
      }
    }
  }
}

void depthwise_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                       double* y) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto channels = static_cast<ptrdiff_t>(g.in_channels);
  const size_t work = g.in_channels * oh * ow * kk * kk;
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t c = 0; c < channels; ++c) {
    const double* wk = w + c * kk * kk;
    const double* xc = x + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        double acc = b ? b[c] : 0.0;
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
            if (ix < 0 || ix >= W) continue;
            acc += wk[ky * kk + kx] * xc[iy * W + ix];
          }
        }
        y[(c * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void depthwise_backward_input(const ConvGeometry& g, const double* w, const double* dy,
                              double* dx) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto channels = static_cast<ptrdiff_t>(g.in_channels);
  const size_t work = g.in_channels * oh * ow * kk * kk;
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t c = 0; c < channels; ++c) {
    const double* wk = w + c * kk * kk;
    double* dxc = dx + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(c * oh + oy) * ow + ox];
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
            if (ix < 0 || ix >= W) continue;
            dxc[iy * W + ix] += wk[ky * kk + kx] * go;
          }
        }
      }
    }
  }
}

void depthwise_backward_weight(const ConvGeometry& g, const double* x, const double* dy,
                               double* dw, double* db) {
  const size_t oh = g.out_height(), ow = g.out_width(), kk = g.kernel;
  const auto H = static_cast<ptrdiff_t>(g.in_height), W = static_cast<ptrdiff_t>(g.in_width);
  const auto channels = static_cast<ptrdiff_t>(g.in_channels);
  const size_t work = g.in_channels * oh * ow * kk * kk;
#pragma omp parallel for schedule(static) if (work >= kMinParallelWork)
  for (ptrdiff_t c = 0; c < channels; ++c) {
    double* dwk = dw + c * kk * kk;
    const double* xc = x + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(c * oh + oy) * ow + ox];
        if (db) db[c] += go;
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = in_coord(oy, g.stride, ky, g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = in_coord(ox, g.stride, kx, g.pad);
            if (ix < 0 || ix >= W) continue;
            dwk[ky * kk + kx] += go * xc[iy * W + ix];
          }
        }
      }
    }
  }
}

}  // namespace surmr::nn::kernels
