#pragma once
// The predictor: a convolutional regressor from the elevation grid to the 240
// DA-error outputs (120 normalized distances, then 120 normalized angles).
//
// The grid first passes through two fixed, parameter-free transforms —
// geometric re-simulation features and per-slot clearance corridors
// (features.hpp) — then per slot:
//
//   corridor 1x7x48 -> conv 5x5 -> ReLU -> maxpool 1x2
//                   -> conv 5x5 -> ReLU -> global avg pool  -> conv embedding
//   concat(geo features 31, conv embedding, slot embedding)
//      -> dense -> ReLU -> dense -> ReLU -> dense -> correction (sx, sy)
//
// The head operates in vector space: per slot the re-simulated oracle vector
// v = (r cos t, r sin t)/50 is blended with a per-(slot, detection-pattern)
// statistical table through a gate, and the network contributes a bounded
// multiplicative (complex) correction:
//
//   base = sigmoid(gate[k,p]) * table[k,p] + (1 - sigmoid(gate[k,p])) * v
//   u    = base * (1 + sx + i sy)
//   out  = (|u|, atan2(u)/pi)
//
// The table and gate are data-derived statistics (per-group vector medians,
// chosen over the oracle when they fit the training members better); they are
// serialized with the model but excluded from gradient training, like batch
// normalization running statistics. All 120 slots share the conv and dense
// weights; the slot embedding carries per-slot identity. Outputs are trained
// against r/50 and theta/pi.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mapfix/features.hpp"
#include "mapfix/labeling.hpp"
#include "mapfix/nn.hpp"
#include "mapfix/scene.hpp"

namespace mapfix {

// Normalized geometric features: the 28 raw dimensions plus the derived polar
// triple (theta/pi, cos theta, sin theta) of the oracle vector.
inline constexpr int kGeoNormDim = kGeoFeatDim + 3;
// Detection patterns index a 7-bit table row per slot.
inline constexpr int kNumPatterns = 128;
inline constexpr int kNumSlots = 120;
// Gate logits for table-on / table-off groups, and the member count a group
// needs before its median is trusted over the oracle.
inline constexpr double kGateOn = 6.0;
inline constexpr double kGateOff = -6.0;
inline constexpr int kMinGroup = 8;

struct ModelConfig {
    int grid_size = 128;      // expected raster edge
    PathMode mode = PathMode::SinglePath;  // re-simulation mode, from the case
    int conv1_ch = 8;
    int conv2_ch = 8;
    int emb_dim = 24;
    int hidden = 256;

    int head_in() const { return kGeoNormDim + conv2_ch + emb_dim; }
};

// Offsets of each parameter tensor inside the flat parameter vector, in
// declaration (= serialization) order. Tensors below `trainable` are updated
// by the optimizer; `table` and `gate` are frozen statistics.
struct ParamLayout {
    std::size_t conv1_w, conv1_b;
    std::size_t conv2_w, conv2_b;
    std::size_t emb;
    std::size_t d1_w, d1_b;
    std::size_t d2_w, d2_b;
    std::size_t d3_w, d3_b;
    std::size_t table, gate;
    std::size_t trainable;  // == table
    std::size_t total;
};

ParamLayout make_layout(const ModelConfig& cfg);

// Scratch space for one sample's forward/backward pass. Keeping the per-slot
// activations makes backward a straight replay; the per-slot gradient buffers
// let the slot loop run in parallel and still reduce in fixed slot order.
struct Workspace {
    explicit Workspace(const ModelConfig& cfg);
    ModelConfig cfg;
    // per-slot activations, each 120 x (size)
    std::vector<double> cor, c1, r1, p1, c2, r2, cemb;
    std::vector<int> p1_idx;
    std::vector<double> geo_n, h0, z1, a1, z2, a2, corr;
    std::vector<double> base, u;  // 120 x 2 vector-head intermediates
    std::vector<int> pattern;     // 120
    // per-slot conv-parameter gradients + dense-layer deltas
    std::vector<double> slot_grad;
    std::size_t slot_grad_stride = 0;
};

class Model {
  public:
    explicit Model(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const ParamLayout& layout() const { return lay_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Seeds the trainable tensors (He-uniform) and resets the statistical
    // layer to pass-through (gate off everywhere, empty table).
    void init(std::uint64_t seed);

    // Forward from precomputed fixed transforms (training hot path).
    // geo: 120 x kGeoFeatDim raw floats, corridors: 120 x 7 x 48 floats.
    // out: 240 doubles, [0..119] = r/50, [120..239] = theta/pi.
    void forward(const float* geo, const float* corridors, Workspace& ws,
                 double* out, Exec exec = Exec::Parallel) const;

    // Backward for grad_out (d loss / d output). Accumulates into grad
    // (size layout().trainable). Call order: forward, then backward with the
    // same workspace.
    void backward(const double* grad_out, Workspace& ws, double* grad,
                  Exec exec = Exec::Parallel) const;

    // Convenience inference from a raw grid (computes the fixed transforms).
    std::array<DaError, 120> predict(const ElevationGrid& grid,
                                     Exec exec = Exec::Parallel) const;

    void save(const std::string& path) const;
    static Model load(const std::string& path);

  private:
    ModelConfig cfg_;
    ParamLayout lay_;
    std::vector<double> params_;
};

// Fixed normalization of the geometric feature block (meters -> model units),
// 28 raw floats -> kGeoNormDim doubles.
void normalize_geo(const float* geo, double extent, double* out);

// 7-bit detection-pattern index from a slot's raw feature row.
int pattern_index(const float* geo_row);

// Converts the 240 normalized outputs to per-slot DA errors (r clamped to
// [0, 50], theta to [-pi, pi)).
std::array<DaError, 120> denormalize_outputs(const double* out);

// ---- spec-shaped tiny model for the analytic-vs-numeric gradient check ----
// conv 5x5 (1 -> 2 channels, same padding) -> ReLU -> maxpool 2x2 -> dense
// to 240 outputs, on a 16x16 input.
struct TinyModel {
    static constexpr int kIn = 16, kCh = 2, kOut = 240;
    std::vector<double> params;
    TinyModel();
    void init(std::uint64_t seed);
    std::size_t n_params() const { return params.size(); }
    // Returns RMSE loss against target; fills grad (same size as params)
    // when grad != nullptr.
    double loss(const double* input, const double* target, double* grad) const;
};

// Max relative gradient error between analytic and central-difference
// numeric gradients (h = 1e-3) over every parameter of a TinyModel.
double gradient_check(const TinyModel& model, const double* input,
                      const double* target, double h = 1e-3);

}  // namespace mapfix
