#pragma once
// Mini-batch Adam training of the predictor on a labeled dataset, with the
// Eq. 2 RMSE loss, per-epoch exponential learning-rate decay, best-validation
// checkpointing, and a CSV training log. Deterministic given the seed: the
// initialization and shuffling streams are keyed, and every parallel
// reduction runs in a fixed order.

#include <cstdint>
#include <string>
#include <vector>

#include "mapfix/labeling.hpp"
#include "mapfix/model.hpp"

namespace mapfix {

struct TrainConfig {
    int batch_size = 4;
    double lr0 = 1e-5;
    double decay = 0.95;   // per-epoch exponential
    int epochs = 200;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
};

// A dataset with its fixed transforms precomputed (they depend only on the
// grids, not on the parameters, so they are cached once).
struct PackedDataset {
    int n = 0;
    PathMode mode = PathMode::SinglePath;
    int grid_size = 0;
    std::vector<float> geo;        // n x 120 x kGeoFeatDim
    std::vector<float> corridors;  // n x 120 x 7 x 48
    std::vector<double> targets;   // n x 240, normalized (r/50 then theta/pi)
    std::vector<std::uint8_t> mask;  // n x 120, 1 = genuine TDOA label
};

PackedDataset pack_dataset(const std::vector<Sample>& samples, Exec exec);

// Derives the frozen statistical layer from the training split: per
// (slot, detection pattern) group of genuine labels, the componentwise median
// of the label vectors (r cos t, r sin t)/50; the gate opens where the median
// fits the group members better than the re-simulated oracle vector does and
// the group has at least kMinGroup members.
void init_statistical_layer(Model& model, const PackedDataset& train);

// Per-sample Eq. 2 loss: sqrt(mean over the 240 outputs); the gradient , when
// requested, is accumulated scaled by `scale` (1/batch for batch means).
double sample_loss(const double* out, const double* target, double* grad_out,
                   double scale);

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    double best_val = 0.0;
    int best_epoch = -1;
};

// Trains in place; model must be constructed with the matching config.
// Throws std::runtime_error on divergence (non-finite loss). Writes the
// log as CSV (epoch, lr, train_rmse, val_rmse) to log_path when non-empty.
TrainResult train_model(Model& model, const PackedDataset& train,
                        const PackedDataset& val, const TrainConfig& cfg,
                        const std::string& log_path, Exec exec,
                        bool verbose = false);

// Mean per-sample RMSE loss of the current parameters over a dataset.
double dataset_loss(const Model& model, const PackedDataset& ds, Exec exec);

}  // namespace mapfix
