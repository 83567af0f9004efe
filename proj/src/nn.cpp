#include "mapfix/nn.hpp"

#include <cmath>
#include <cstring>

namespace mapfix {

namespace {
constexpr int kPad = kKernel / 2;
}

void conv2d_forward(const double* in, int ic, int h, int w, const double* wt,
                    const double* bias, int oc, double* out, Exec exec) {
    parallel_for(static_cast<std::size_t>(oc), exec, [&](std::size_t o) {
        const double* wo = wt + o * ic * kKernel * kKernel;
        double* po = out + o * h * w;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = bias[o];
                for (int c = 0; c < ic; ++c) {
                    const double* pi = in + c * h * w;
                    const double* wc = wo + c * kKernel * kKernel;
                    for (int ky = 0; ky < kKernel; ++ky) {
                        const int iy = y + ky - kPad;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kKernel; ++kx) {
                            const int ix = x + kx - kPad;
                            if (ix < 0 || ix >= w) continue;
                            acc += wc[ky * kKernel + kx] * pi[iy * w + ix];
                        }
                    }
                }
                po[y * w + x] = acc;
            }
        }
    });
}

void conv2d_backward(const double* in, int ic, int h, int w, const double* wt,
                     int oc, const double* grad_out, double* grad_in,
                     double* grad_wt, double* grad_bias, Exec exec) {
    // Weight and bias gradients: disjoint per output channel.
    parallel_for(static_cast<std::size_t>(oc), exec, [&](std::size_t o) {
        const double* go = grad_out + o * h * w;
        double gb = 0.0;
        for (int i = 0; i < h * w; ++i) gb += go[i];
        grad_bias[o] += gb;
        double* gwo = grad_wt + o * ic * kKernel * kKernel;
        for (int c = 0; c < ic; ++c) {
            const double* pi = in + c * h * w;
            double* gwc = gwo + c * kKernel * kKernel;
            for (int ky = 0; ky < kKernel; ++ky) {
                for (int kx = 0; kx < kKernel; ++kx) {
                    double acc = 0.0;
                    for (int y = 0; y < h; ++y) {
                        const int iy = y + ky - kPad;
                        if (iy < 0 || iy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            const int ix = x + kx - kPad;
                            if (ix < 0 || ix >= w) continue;
                            acc += go[y * w + x] * pi[iy * w + ix];
                        }
                    }
                    gwc[ky * kKernel + kx] += acc;
                }
            }
        }
    });
    if (!grad_in) return;
    // Input gradient: disjoint per input channel.
    parallel_for(static_cast<std::size_t>(ic), exec, [&](std::size_t c) {
        double* gi = grad_in + c * h * w;
        for (int iy = 0; iy < h; ++iy) {
            for (int ix = 0; ix < w; ++ix) {
                double acc = 0.0;
                for (int o = 0; o < oc; ++o) {
                    const double* go = grad_out + o * h * w;
                    const double* wc =
                        wt + (o * ic + c) * kKernel * kKernel;
                    for (int ky = 0; ky < kKernel; ++ky) {
                        const int y = iy - ky + kPad;
                        if (y < 0 || y >= h) continue;
                        for (int kx = 0; kx < kKernel; ++kx) {
                            const int x = ix - kx + kPad;
                            if (x < 0 || x >= w) continue;
                            acc += go[y * w + x] * wc[ky * kKernel + kx];
                        }
                    }
                }
                gi[iy * w + ix] = acc;
            }
        }
    });
}

void relu_forward(const double* in, int n, double* out) {
    for (int i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* in, const double* grad_out, int n, double* grad_in) {
    for (int i = 0; i < n; ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void maxpool_forward(const double* in, int c, int h, int w, int ph, int pw,
                     double* out, int* argmax) {
    const int oh = h / ph, ow = w / pw;
    for (int ch = 0; ch < c; ++ch) {
        const double* pi = in + ch * h * w;
        double* po = out + ch * oh * ow;
        int* pa = argmax + ch * oh * ow;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                int best = (y * ph) * w + x * pw;
                double bv = pi[best];
                for (int dy = 0; dy < ph; ++dy) {
                    for (int dx = 0; dx < pw; ++dx) {
                        const int idx = (y * ph + dy) * w + (x * pw + dx);
                        if (pi[idx] > bv) {
                            bv = pi[idx];
                            best = idx;
                        }
                    }
                }
                po[y * ow + x] = bv;
                pa[y * ow + x] = ch * h * w + best;
            }
        }
    }
}

void maxpool_backward(const int* argmax, const double* grad_out, int c, int h,
                      int w, int ph, int pw, double* grad_in) {
    const int oh = h / ph, ow = w / pw;
    std::memset(grad_in, 0, sizeof(double) * c * h * w);
    for (int i = 0; i < c * oh * ow; ++i) grad_in[argmax[i]] += grad_out[i];
}

void avgpool_forward(const double* in, int c, int h, int w, double* out) {
    for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        const double* pi = in + ch * h * w;
        for (int i = 0; i < h * w; ++i) acc += pi[i];
        out[ch] = acc / (h * w);
    }
}

void avgpool_backward(const double* grad_out, int c, int h, int w, double* grad_in) {
    for (int ch = 0; ch < c; ++ch) {
        const double g = grad_out[ch] / (h * w);
        double* gi = grad_in + ch * h * w;
        for (int i = 0; i < h * w; ++i) gi[i] = g;
    }
}

void dense_forward(const double* in, int n_in, const double* wt, const double* bias,
                   int n_out, double* out, Exec exec) {
    parallel_for(static_cast<std::size_t>(n_out), exec, [&](std::size_t o) {
        const double* row = wt + o * n_in;
        double acc = bias[o];
        for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
        out[o] = acc;
    });
}

void dense_backward(const double* in, int n_in, const double* wt, int n_out,
                    const double* grad_out, double* grad_in, double* grad_wt,
                    double* grad_bias, Exec exec) {
    if (grad_wt) {
        parallel_for(static_cast<std::size_t>(n_out), exec, [&](std::size_t o) {
            const double g = grad_out[o];
            grad_bias[o] += g;
            double* gw = grad_wt + o * n_in;
            for (int i = 0; i < n_in; ++i) gw[i] += g * in[i];
        });
    }
    if (!grad_in) return;
    for (int i = 0; i < n_in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < n_out; ++o) acc += wt[o * n_in + i] * grad_out[o];
        grad_in[i] = acc;
    }
}

void he_uniform_fill(double* wt, std::size_t n, int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::size_t i = 0; i < n; ++i) wt[i] = rng.uniform(-bound, bound);
}

void Adam::step(double lr, const double* grad, double* params, Exec exec) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    const double b1 = cfg_.beta1, b2 = cfg_.beta2, eps = cfg_.eps;
    double* m = m_.data();
    double* v = v_.data();
    parallel_for(m_.size(), exec, [&](std::size_t i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        params[i] -= lr * mh / (std::sqrt(vh) + eps);
    });
}

void Adam::reset() {
    t_ = 0;
    std::fill(m_.begin(), m_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
}

}  // namespace mapfix
