#pragma once
// Minimal from-scratch neural-network kernels: 5x5 same-padding convolution,
// ReLU, max/average pooling, dense layers, and Adam. Everything computes in
// double; weights serialize as f32. Each kernel has one implementation whose
// loops write disjoint outputs in a fixed per-element order, so the Serial
// and Parallel execution modes are bit-identical (asserted in tests).

#include <cstdint>
#include <vector>

#include "mapfix/parallel.hpp"
#include "mapfix/rng.hpp"

namespace mapfix {

inline constexpr int kKernel = 5;  // all convolutions are 5x5 (paper pin)

// ---- convolution, stride 1, zero "same" padding -------------------------
// in:  ic x h x w (row-major), weights: oc x ic x 5 x 5, bias: oc
// out: oc x h x w
void conv2d_forward(const double* in, int ic, int h, int w, const double* wt,
                    const double* bias, int oc, double* out, Exec exec = Exec::Serial);

// Gradients w.r.t. input, weights and bias. grad_in may be null (first layer).
void conv2d_backward(const double* in, int ic, int h, int w, const double* wt,
                     int oc, const double* grad_out, double* grad_in,
                     double* grad_wt, double* grad_bias, Exec exec = Exec::Serial);

// ---- elementwise ReLU ----------------------------------------------------
void relu_forward(const double* in, int n, double* out);
void relu_backward(const double* in, const double* grad_out, int n, double* grad_in);

// ---- max pooling (ph x pw windows, h % ph == 0, w % pw == 0) -------------
// argmax records the flat input index that won each window.
void maxpool_forward(const double* in, int c, int h, int w, int ph, int pw,
                     double* out, int* argmax);
void maxpool_backward(const int* argmax, const double* grad_out, int c, int h,
                      int w, int ph, int pw, double* grad_in);

// ---- full-plane average pooling: c x h x w -> c --------------------------
void avgpool_forward(const double* in, int c, int h, int w, double* out);
void avgpool_backward(const double* grad_out, int c, int h, int w, double* grad_in);

// ---- dense: out = W x in + b, W is n_out x n_in row-major ----------------
void dense_forward(const double* in, int n_in, const double* wt, const double* bias,
                   int n_out, double* out, Exec exec = Exec::Serial);
void dense_backward(const double* in, int n_in, const double* wt, int n_out,
                    const double* grad_out, double* grad_in, double* grad_wt,
                    double* grad_bias, Exec exec = Exec::Serial);

// ---- He-style uniform init, bound sqrt(6 / fan_in), biases zero ----------
void he_uniform_fill(double* wt, std::size_t n, int fan_in, Rng& rng);

// ---- Adam ----------------------------------------------------------------
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    Adam(std::size_t n, AdamConfig cfg = {}) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    // One update with learning rate lr; t starts at 1 for bias correction.
    void step(double lr, const double* grad, double* params, Exec exec = Exec::Serial);
    void reset();

  private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace mapfix
