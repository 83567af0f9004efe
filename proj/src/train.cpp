#include "mapfix/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mapfix {

PackedDataset pack_dataset(const std::vector<Sample>& samples, Exec exec) {
    PackedDataset ds;
    ds.n = static_cast<int>(samples.size());
    if (ds.n == 0) return ds;
    ds.mode = case_mode(samples[0].case_id);
    ds.grid_size = samples[0].grid.w;
    const std::size_t geo_n = static_cast<std::size_t>(120) * kGeoFeatDim;
    const std::size_t cor_n = static_cast<std::size_t>(120) * kCorridorRows * kCorridorCols;
    ds.geo.resize(ds.n * geo_n);
    ds.corridors.resize(ds.n * cor_n);
    ds.targets.resize(ds.n * static_cast<std::size_t>(240));
    ds.mask.resize(ds.n * static_cast<std::size_t>(120));
    // One sample per iteration: geometric_features dominates, and samples
    // are independent, so parallelize across them with serial inners.
    parallel_for(static_cast<std::size_t>(ds.n), exec, [&](std::size_t i) {
        const Sample& s = samples[i];
        std::vector<float> geo, cor;
        geometric_features(s.grid, case_mode(s.case_id), geo, Exec::Serial);
        corridor_tensor(s.grid, cor, Exec::Serial);
        std::copy(geo.begin(), geo.end(), ds.geo.begin() + i * geo_n);
        std::copy(cor.begin(), cor.end(), ds.corridors.begin() + i * cor_n);
        double* t = ds.targets.data() + i * 240;
        for (int k = 0; k < 120; ++k) {
            t[k] = s.labels[k].r / 50.0;
            t[120 + k] = s.labels[k].theta / kPi;
            ds.mask[i * 120 + k] = s.mask[k];
        }
    });
    return ds;
}

void init_statistical_layer(Model& model, const PackedDataset& train) {
    const std::size_t geo_n = static_cast<std::size_t>(120) * kGeoFeatDim;
    // Member label vectors and oracle vectors per (slot, pattern) group,
    // gathered in sample order so the statistics are deterministic.
    struct Group {
        std::vector<double> vx, vy;
        double or_se = 0.0;  // sum of squared oracle-vector errors
    };
    std::vector<Group> groups(static_cast<std::size_t>(kNumSlots) * kNumPatterns);
    for (int i = 0; i < train.n; ++i) {
        const float* geo = train.geo.data() + i * geo_n;
        const double* t = train.targets.data() + i * static_cast<std::size_t>(240);
        for (int k = 0; k < kNumSlots; ++k) {
            if (!train.mask[i * static_cast<std::size_t>(120) + k]) continue;
            const float* row = geo + k * kGeoFeatDim;
            const double lvx = t[k] * std::cos(t[120 + k] * kPi);
            const double lvy = t[k] * std::sin(t[120 + k] * kPi);
            const double ovx = row[0] / 50.0;
            const double ovy = row[1] / 50.0;
            Group& g = groups[k * static_cast<std::size_t>(kNumPatterns) +
                              pattern_index(row)];
            g.vx.push_back(lvx);
            g.vy.push_back(lvy);
            g.or_se += (ovx - lvx) * (ovx - lvx) + (ovy - lvy) * (ovy - lvy);
        }
    }
    auto median = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    double* P = model.params().data();
    const ParamLayout& lay = model.layout();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        Group& g = groups[gi];
        P[lay.gate + gi] = kGateOff;
        P[lay.table + gi * 2] = 0.0;
        P[lay.table + gi * 2 + 1] = 0.0;
        if (g.vx.empty()) continue;
        const std::size_t n = g.vx.size();
        std::vector<double> sx = g.vx, sy = g.vy;
        const double mx = median(sx);
        const double my = median(sy);
        P[lay.table + gi * 2] = mx;
        P[lay.table + gi * 2 + 1] = my;
        double med_se = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            med_se += (mx - g.vx[j]) * (mx - g.vx[j]) + (my - g.vy[j]) * (my - g.vy[j]);
        if (n >= static_cast<std::size_t>(kMinGroup) && med_se < g.or_se)
            P[lay.gate + gi] = kGateOn;
    }
}

double sample_loss(const double* out, const double* target, double* grad_out,
                   double scale) {
    double se = 0.0;
    for (int i = 0; i < 240; ++i) {
        const double d = out[i] - target[i];
        se += d * d;
    }
    const double loss = std::sqrt(se / 240.0);
    if (grad_out) {
        const double g = scale / (240.0 * std::max(loss, 1e-30));
        for (int i = 0; i < 240; ++i) grad_out[i] = g * (out[i] - target[i]);
    }
    return loss;
}

double dataset_loss(const Model& model, const PackedDataset& ds, Exec exec) {
    const std::size_t geo_n = static_cast<std::size_t>(120) * kGeoFeatDim;
    const std::size_t cor_n = static_cast<std::size_t>(120) * kCorridorRows * kCorridorCols;
    Workspace ws(model.config());
    std::vector<double> out(240);
    double total = 0.0;
    for (int i = 0; i < ds.n; ++i) {
        model.forward(ds.geo.data() + i * geo_n, ds.corridors.data() + i * cor_n,
                      ws, out.data(), exec);
        total += sample_loss(out.data(), ds.targets.data() + i * 240, nullptr, 1.0);
    }
    return ds.n ? total / ds.n : 0.0;
}

TrainResult train_model(Model& model, const PackedDataset& train,
                        const PackedDataset& val, const TrainConfig& cfg,
                        const std::string& log_path, Exec exec, bool verbose) {
    if (cfg.batch_size <= 0 || cfg.epochs < 0 || cfg.decay <= 0.0 || cfg.decay > 1.0)
        throw std::runtime_error("invalid train config");
    const std::size_t geo_n = static_cast<std::size_t>(120) * kGeoFeatDim;
    const std::size_t cor_n = static_cast<std::size_t>(120) * kCorridorRows * kCorridorCols;

    model.init(cfg.seed);
    init_statistical_layer(model, train);
    // The statistical layer is frozen: the optimizer covers the trainable
    // prefix of the parameter vector only.
    const std::size_t n_train_params = model.layout().trainable;
    Adam opt(n_train_params, {cfg.beta1, cfg.beta2, cfg.eps});
    Workspace ws(model.config());
    std::vector<double> out(240), gout(240), grad(n_train_params);
    std::vector<int> order(train.n);
    for (int i = 0; i < train.n; ++i) order[i] = i;

    TrainResult res;
    // The best-validation checkpoint set includes the initialized,
    // pre-training model (epoch -1 in the result).
    res.best_val = dataset_loss(model, val, exec);
    if (!std::isfinite(res.best_val))
        throw std::runtime_error("training diverged (non-finite val loss)");
    std::vector<double> best_params = model.params();
    if (verbose) {
        std::printf("init       val %.5f\n", res.best_val);
        std::fflush(stdout);
    }

    for (int ep = 0; ep < cfg.epochs; ++ep) {
        const double lr = cfg.lr0 * std::pow(cfg.decay, ep);
        // Fisher-Yates with a per-epoch keyed stream.
        Rng shuffle(derive_seed({cfg.seed, 0x5Au, static_cast<std::uint64_t>(ep)}));
        for (int i = train.n - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle.uniform(0.0, i + 1.0));
            std::swap(order[i], order[std::min(j, i)]);
        }

        double ep_loss = 0.0;
        int n_batches = 0;
        for (int b0 = 0; b0 < train.n; b0 += cfg.batch_size) {
            const int bn = std::min(cfg.batch_size, train.n - b0);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (int bi = 0; bi < bn; ++bi) {
                const int i = order[b0 + bi];
                model.forward(train.geo.data() + i * geo_n,
                              train.corridors.data() + i * cor_n, ws, out.data(),
                              exec);
                batch_loss += sample_loss(out.data(), train.targets.data() + i * 240,
                                          gout.data(), 1.0 / bn);
                model.backward(gout.data(), ws, grad.data(), exec);
            }
            batch_loss /= bn;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged (non-finite loss)");
            opt.step(lr, grad.data(), model.params().data(), exec);
            ep_loss += batch_loss;
            ++n_batches;
        }

        EpochLog row;
        row.epoch = ep;
        row.lr = lr;
        row.train_rmse = n_batches ? ep_loss / n_batches : 0.0;
        row.val_rmse = dataset_loss(model, val, exec);
        if (!std::isfinite(row.val_rmse))
            throw std::runtime_error("training diverged (non-finite val loss)");
        res.log.push_back(row);
        if (row.val_rmse < res.best_val) {
            res.best_val = row.val_rmse;
            res.best_epoch = ep;
            best_params = model.params();
        }
        if (verbose) {
            std::printf("epoch %3d  lr %.3e  train %.5f  val %.5f%s\n", ep, lr,
                        row.train_rmse, row.val_rmse,
                        res.best_epoch == ep ? "  *" : "");
            std::fflush(stdout);
        }
    }

    model.params() = best_params;
    if (!log_path.empty()) {
        std::ofstream f(log_path);
        f << "epoch,lr,train_rmse,val_rmse\n";
        char line[128];
        for (const EpochLog& r : res.log) {
            std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g\n", r.epoch,
                          r.lr, r.train_rmse, r.val_rmse);
            f << line;
        }
    }
    return res;
}

}  // namespace mapfix
