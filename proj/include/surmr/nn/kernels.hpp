#pragma once

#include <cstddef>

// Dense compute kernels. Every kernel exists twice: an OpenMP version used by
// the network and a plain serial reference in `serial::` kept for testing and
// benchmarking. The OpenMP versions split work over output rows/channels only,
// so each output element is accumulated in the same order as the serial loop
// and results are bit-identical regardless of thread count.

namespace surmr::nn::kernels {

struct ConvGeometry {
  std::size_t in_channels = 0;
  std::size_t in_height = 0;
  std::size_t in_width = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_height() const { return (in_height + 2 * pad - kernel) / stride + 1; }
  std::size_t out_width() const { return (in_width + 2 * pad - kernel) / stride + 1; }
};

// c[m,n] = a[m,k] * b[k,n]  (c += ... when accumulate)
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate);
// c[m,n] = a[k,m]^T * b[k,n]
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
// c[m,n] = a[m,k] * b[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);

// x: (Ci,H,W), w: (Co,Ci,k,k), b: (Co) or nullptr, y: (Co,Ho,Wo) overwritten.
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y);
// dx += conv2d^T(dy)
void conv2d_backward_input(const ConvGeometry& g, const double* w, const double* dy, double* dx);
// dw += ..., db += ... (db may be nullptr)
void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw,
                            double* db);

// Depthwise variants: in_channels == out_channels, w: (C,k,k).
void depthwise_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                       double* y);
void depthwise_backward_input(const ConvGeometry& g, const double* w, const double* dy,
                              double* dx);
void depthwise_backward_weight(const ConvGeometry& g, const double* x, const double* dy,
                               double* dw, double* db);

namespace serial {

void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate);
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n, bool accumulate);
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y);
void conv2d_backward_input(const ConvGeometry& g, const double* w, const double* dy, double* dx);
void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw,
                            double* db);
void depthwise_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                       double* y);
void depthwise_backward_input(const ConvGeometry& g, const double* w, const double* dy,
                              double* dx);
void depthwise_backward_weight(const ConvGeometry& g, const double* x, const double* dy,
                               double* dw, double* db);

}  // namespace serial

int max_threads();

}  // namespace surmr::nn::kernels
