#include <cstddef>
#include <cstring>

#include "surmr/nn/kernels.hpp"

namespace surmr::nn::kernels::serial {

using std::ptrdiff_t;
using std::size_t;

void matmul(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
            bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
               bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n;
    for (size_t i = 0; i < m; ++i) {
      const double av = a[p * m + i];
      double* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n,
               bool accumulate) {
  for (size_t i = 0; i < m; ++i) {
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
  for (size_t co = 0; co < g.out_channels; ++co) {
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        double acc = b ? b[co] : 0.0;
        for (size_t ci = 0; ci < g.in_channels; ++ci) {
          const double* wk = w + ((co * g.in_channels + ci) * kk) * kk;
          const double* xc = x + ci * g.in_height * g.in_width;
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
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
  for (size_t co = 0; co < g.out_channels; ++co) {
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(co * oh + oy) * ow + ox];
        for (size_t ci = 0; ci < g.in_channels; ++ci) {
          const double* wk = w + ((co * g.in_channels + ci) * kk) * kk;
          double* dxc = dx + ci * g.in_height * g.in_width;
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
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
  for (size_t co = 0; co < g.out_channels; ++co) {
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(co * oh + oy) * ow + ox];
        if (db) db[co] += go;
        for (size_t ci = 0; ci < g.in_channels; ++ci) {
          double* dwk = dw + ((co * g.in_channels + ci) * kk) * kk;
          const double* xc = x + ci * g.in_height * g.in_width;
          for (size_t ky = 0; ky < kk; ++ky) {
            const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= H) continue;
            for (size_t kx = 0; kx < kk; ++kx) {
              const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
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
  for (size_t c = 0; c < g.in_channels; ++c) {
    const double* wk = w + c * kk * kk;
    const double* xc = x + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        double acc = b ? b[c] : 0.0;
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
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
  for (size_t c = 0; c < g.in_channels; ++c) {
    const double* wk = w + c * kk * kk;
    double* dxc = dx + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(c * oh + oy) * ow + ox];
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
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
  for (size_t c = 0; c < g.in_channels; ++c) {
    double* dwk = dw + c * kk * kk;
    const double* xc = x + c * g.in_height * g.in_width;
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const double go = dy[(c * oh + oy) * ow + ox];
        if (db) db[c] += go;
        for (size_t ky = 0; ky < kk; ++ky) {
          const ptrdiff_t iy = static_cast<ptrdiff_t>(oy * g.stride + ky) - static_cast<ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= H) continue;
          for (size_t kx = 0; kx < kk; ++kx) {
            const ptrdiff_t ix = static_cast<ptrdiff_t>(ox * g.stride + kx) - static_cast<ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= W) continue;
            dwk[ky * kk + kx] += go * xc[iy * W + ix];
          }
        }
      }
    }
  }
}

}  // namespace surmr::nn::kernels::serial
