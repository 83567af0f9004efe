#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mapfix/compensate.hpp"
#include "mapfix/metrics.hpp"
#include "mapfix/train.hpp"

using namespace mapfix;

namespace {

ElevationGrid flat_grid(int size) {
    ElevationGrid g;
    g.h = size;
    g.w = size;
    g.resolution = static_cast<float>(SceneParams{}.extent / size);
    g.cells.assign(static_cast<std::size_t>(size) * size, 0.0f);
    return g;
}

// Synthetic packed dataset with plausible feature magnitudes; labels and
// masks are injected by the caller.
PackedDataset synth_packed(int n, std::uint64_t seed) {
    Rng rng(seed);
    PackedDataset ds;
    ds.n = n;
    ds.mode = PathMode::SinglePath;
    ds.grid_size = 128;
    ds.geo.resize(static_cast<std::size_t>(n) * 120 * kGeoFeatDim);
    ds.corridors.resize(static_cast<std::size_t>(n) * 120 * kCorridorRows * kCorridorCols);
    ds.targets.resize(static_cast<std::size_t>(n) * 240);
    ds.mask.resize(static_cast<std::size_t>(n) * 120);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 120; ++k) {
            float* g = ds.geo.data() + (static_cast<std::size_t>(i) * 120 + k) * kGeoFeatDim;
            g[0] = static_cast<float>(rng.uniform(10.0, 40.0));
            g[1] = static_cast<float>(rng.uniform(-15.0, 15.0));
            g[2] = std::min(std::hypot(g[0], g[1]), 50.0f);
            g[3] = 1.0f;
            int det = 0;
            for (int j = 0; j < 7; ++j) {
                g[4 + j] = rng.uniform() < 0.7 ? 1.0f : 0.0f;
                det += g[4 + j] > 0.5f;
                g[11 + j] = static_cast<float>(rng.uniform(-5.0, 15.0));
                g[18 + j] = static_cast<float>(rng.uniform(0.0, 100.0));
            }
            g[25] = static_cast<float>(det);
            g[26] = static_cast<float>(rng.uniform(0.0, 512.0));
            g[27] = static_cast<float>(rng.uniform(0.0, 512.0));
            ds.mask[static_cast<std::size_t>(i) * 120 + k] = rng.uniform() < 0.8;
            const double r = rng.uniform(0.02, 0.9);
            const double th = rng.uniform(-1.0, 1.0);
            ds.targets[static_cast<std::size_t>(i) * 240 + k] = r;
            ds.targets[static_cast<std::size_t>(i) * 240 + 120 + k] = th;
        }
    }
    for (auto& v : ds.corridors) v = static_cast<float>(rng.uniform(-0.3, 0.8));
    return ds;
}

ModelConfig small_cfg() {
    ModelConfig cfg;
    cfg.conv1_ch = 2;
    cfg.conv2_ch = 2;
    cfg.emb_dim = 3;
    cfg.hidden = 16;
    return cfg;
}

}  // namespace

TEST_CASE("median handles odd, even, and empty inputs") {
    CHECK(median({}) == 0.0);
    CHECK(median({3.0}) == 3.0);
    CHECK(median({5.0, 1.0, 9.0}) == 5.0);
    CHECK(median({4.0, 1.0, 9.0, 5.0}) == doctest::Approx(4.5));
}

TEST_CASE("baseline_mean_r averages masked labels and caps empty slots") {
    std::vector<Sample> train(2);
    train[0].mask[3] = 1;
    train[0].labels[3].r = 10.0;
    train[1].mask[3] = 1;
    train[1].labels[3].r = 20.0;
    train[0].mask[7] = 1;
    train[0].labels[7].r = 4.0;
    const auto base = baseline_mean_r(train);
    CHECK(base[3] == doctest::Approx(15.0));
    CHECK(base[7] == doctest::Approx(4.0));
    CHECK(base[0] == doctest::Approx(kWorstCaseLabel));
}

TEST_CASE("sample_loss is the per-sample RMSE with matching gradient") {
    std::vector<double> out(240, 0.0), target(240, 0.0);
    out[0] = 3.0;
    out[10] = -4.0;
    const double loss = sample_loss(out.data(), target.data(), nullptr, 1.0);
    CHECK(loss == doctest::Approx(std::sqrt(25.0 / 240.0)));

    std::vector<double> g(240);
    sample_loss(out.data(), target.data(), g.data(), 0.5);
    CHECK(g[0] == doctest::Approx(0.5 * 3.0 / (240.0 * loss)));
    CHECK(g[10] == doctest::Approx(0.5 * -4.0 / (240.0 * loss)));
    CHECK(g[1] == 0.0);

    // numeric agreement of the gradient
    const double h = 1e-7;
    out[0] = 3.0 + h;
    const double lp = sample_loss(out.data(), target.data(), nullptr, 1.0);
    out[0] = 3.0 - h;
    const double lm = sample_loss(out.data(), target.data(), nullptr, 1.0);
    CHECK((lp - lm) / (2 * h) == doctest::Approx(g[0] / 0.5).epsilon(1e-5));
}

TEST_CASE("pack_dataset maps labels, masks, and fixed transforms") {
    std::vector<Sample> samples(2);
    for (int i = 0; i < 2; ++i) {
        samples[i].grid = flat_grid(32);
        samples[i].case_id = Case::B3Single;
        samples[i].labels[5].r = 7.5;
        samples[i].labels[5].theta = 0.3;
        samples[i].mask[5] = 1;
        samples[i].labels[6].r = 50.0;
        samples[i].mask[6] = 0;
    }
    samples[1].labels[5].r = 12.0;
    const PackedDataset ds = pack_dataset(samples, Exec::Serial);
    CHECK(ds.n == 2);
    CHECK((ds.mode == PathMode::SinglePath));
    CHECK(ds.grid_size == 32);
    CHECK(ds.targets[5] == doctest::Approx(7.5 / 50.0));
    CHECK(ds.targets[120 + 5] == doctest::Approx(0.3 / kPi));
    CHECK(ds.targets[240 + 5] == doctest::Approx(12.0 / 50.0));
    CHECK(ds.targets[6] == doctest::Approx(1.0));
    CHECK(ds.mask[5] == 1);
    CHECK(ds.mask[6] == 0);
    CHECK(ds.mask[120 + 5] == 1);
    CHECK(ds.geo.size() == 2u * 120 * kGeoFeatDim);
    CHECK(ds.corridors.size() == 2u * 120 * kCorridorRows * kCorridorCols);
}

TEST_CASE("init_statistical_layer derives componentwise medians and gates") {
    const int n = 10;
    PackedDataset ds;
    ds.n = n;
    ds.geo.assign(static_cast<std::size_t>(n) * 120 * kGeoFeatDim, 0.0f);
    ds.targets.assign(static_cast<std::size_t>(n) * 240, 0.0);
    ds.mask.assign(static_cast<std::size_t>(n) * 120, 0);

    auto set_member = [&](int i, int k, double a, double b, float ox, float oy,
                          int bits) {
        float* g = ds.geo.data() + (static_cast<std::size_t>(i) * 120 + k) * kGeoFeatDim;
        g[0] = ox;
        g[1] = oy;
        for (int j = 0; j < 7; ++j) g[4 + j] = (bits >> j) & 1 ? 1.0f : 0.0f;
        double* t = ds.targets.data() + static_cast<std::size_t>(i) * 240;
        t[k] = std::hypot(a, b);
        t[120 + k] = std::atan2(b, a) / kPi;
        ds.mask[static_cast<std::size_t>(i) * 120 + k] = 1;
    };

    // slot 3, pattern 127: 9 members, bad oracle -> gate opens on the
    // componentwise median (0.25, 0.2), which is not any single member
    const double ax[9] = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
    const double by[9] = {0.40, 0.10, 0.30, 0.20, 0.00, -0.10, 0.20, 0.15, 0.35};
    for (int i = 0; i < 9; ++i) set_member(i, 3, ax[i], by[i], 45.0f, -45.0f, 127);

    // slot 7, pattern 7: only 5 members -> too small, gate stays off even
    // though the members agree perfectly with each other
    for (int i = 0; i < 5; ++i) set_member(i, 7, 0.3, 0.3, 45.0f, -45.0f, 7);

    // slot 9, pattern 127: 10 members whose oracle already matches the label
    // exactly -> the median cannot beat it, gate stays off
    for (int i = 0; i < 10; ++i) {
        const double a = 0.1 * (i + 1);
        set_member(i, 9, a, -0.125, static_cast<float>(a * 50.0), -6.25f, 127);
    }

    ModelConfig cfg = small_cfg();
    Model model(cfg);
    model.init(1);
    init_statistical_layer(model, ds);
    const auto& P = model.params();
    const ParamLayout& lay = model.layout();
    auto gi = [](int k, int p) { return static_cast<std::size_t>(k) * kNumPatterns + p; };

    CHECK(P[lay.gate + gi(3, 127)] == kGateOn);
    CHECK(P[lay.table + gi(3, 127) * 2 + 0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(P[lay.table + gi(3, 127) * 2 + 1] == doctest::Approx(0.20).epsilon(1e-9));

    CHECK(P[lay.gate + gi(7, 7)] == kGateOff);
    CHECK(P[lay.table + gi(7, 7) * 2 + 0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(P[lay.table + gi(7, 7) * 2 + 1] == doctest::Approx(0.3).epsilon(1e-9));

    CHECK(P[lay.gate + gi(9, 127)] == kGateOff);
    CHECK(P[lay.table + gi(9, 127) * 2 + 0] == doctest::Approx(0.55).epsilon(1e-9));

    // untouched group: empty table, gate off
    CHECK(P[lay.gate + gi(0, 0)] == kGateOff);
    CHECK(P[lay.table + gi(0, 0) * 2 + 0] == 0.0);
}

TEST_CASE("evaluate_predictions against perfect, zero, and sentinel predictors") {
    SceneParams sp;
    const auto rx = rx_lattice(sp);
    const int slots[4] = {0, 13, 57, 119};
    Rng rng(88);
    std::vector<Sample> test(3);
    for (auto& s : test) {
        for (int k : slots) {
            const Vec2 truth{rx[k].x, rx[k].y};
            const double ang = rng.uniform(-kPi, kPi);
            const double off = rng.uniform(5.0, 15.0);
            const Vec2 fix{truth.x + off * std::cos(ang), truth.y + off * std::sin(ang)};
            s.fix[k] = fix;
            s.labels[k] = compute_da_error(truth, fix);
            s.mask[k] = 1;
        }
    }

    std::array<double, 120> baseline{};
    baseline.fill(10.0);

    SUBCASE("perfect predictor compensates to (numerically) zero") {
        std::vector<std::array<DaError, 120>> preds;
        for (const auto& s : test) {
            std::array<DaError, 120> p{};
            for (int k = 0; k < 120; ++k) p[k] = s.labels[k];
            preds.push_back(p);
        }
        const EvalResult r = evaluate_predictions(test, preds, baseline);
        CHECK(r.n_masked == 12);
        CHECK(r.feasible_rate == doctest::Approx(12.0 / 360.0));
        CHECK(r.rmse_r == doctest::Approx(0.0));
        CHECK(r.rmse_theta == doctest::Approx(0.0));
        CHECK(r.median_after <= 1e-9);
        CHECK(r.median_before >= 5.0);
        CHECK(r.improvement == doctest::Approx(1.0).epsilon(1e-6));
        // baseline RMSE recomputed by hand
        double se = 0.0;
        for (const auto& s : test)
            for (int k : slots) se += (10.0 - s.labels[k].r) * (10.0 - s.labels[k].r);
        CHECK(r.rmse_r_baseline == doctest::Approx(std::sqrt(se / 12.0)));
    }

    SUBCASE("zero predictor leaves the fixes untouched") {
        std::vector<std::array<DaError, 120>> preds(
            test.size(), [] {
                std::array<DaError, 120> p{};
                for (auto& d : p) d = DaError{0.0, 0.0};
                return p;
            }());
        const EvalResult r = evaluate_predictions(test, preds, baseline);
        REQUIRE(r.before.size() == r.after.size());
        for (std::size_t i = 0; i < r.before.size(); ++i)
            CHECK(r.before[i] == r.after[i]);
        CHECK(r.median_after == doctest::Approx(r.median_before));
        CHECK(r.improvement == doctest::Approx(0.0));
        // distance RMSE against labels, by hand
        double se = 0.0;
        for (const auto& s : test)
            for (int k : slots) se += s.labels[k].r * s.labels[k].r;
        CHECK(r.rmse_r == doctest::Approx(std::sqrt(se / 12.0)));
    }

    SUBCASE("sentinel predictions trip the guard and change nothing") {
        std::vector<std::array<DaError, 120>> preds(
            test.size(), [] {
                std::array<DaError, 120> p{};
                for (auto& d : p) d = DaError{50.0, 1.0};
                return p;
            }());
        const EvalResult r = evaluate_predictions(test, preds, baseline);
        for (std::size_t i = 0; i < r.before.size(); ++i)
            CHECK(r.before[i] == r.after[i]);
        CHECK(r.improvement == doctest::Approx(0.0));
    }
}

TEST_CASE("training with lr0 = 0 keeps the statistically initialized model") {
    const PackedDataset train = synth_packed(8, 500);
    const PackedDataset val = synth_packed(3, 501);
    ModelConfig cfg = small_cfg();

    TrainConfig tc;
    tc.lr0 = 0.0;
    tc.epochs = 2;
    tc.seed = 11;

    Model trained(cfg);
    const TrainResult res = train_model(trained, train, val, tc, "", Exec::Parallel);

    Model expect(cfg);
    expect.init(tc.seed);
    init_statistical_layer(expect, train);

    REQUIRE(trained.params().size() == expect.params().size());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < trained.params().size(); ++i)
        diff += trained.params()[i] != expect.params()[i];
    CHECK(diff == 0);
    CHECK(res.best_epoch == -1);
    CHECK(static_cast<int>(res.log.size()) == tc.epochs);
    CHECK(res.log[0].val_rmse == doctest::Approx(res.best_val));
    CHECK(res.best_val == doctest::Approx(dataset_loss(expect, val, Exec::Parallel)));
}

TEST_CASE("training is deterministic and checkpoints the best validation") {
    const PackedDataset train = synth_packed(9, 610);
    const PackedDataset val = synth_packed(3, 611);
    ModelConfig cfg = small_cfg();

    TrainConfig tc;
    tc.lr0 = 1e-4;
    tc.decay = 0.9;
    tc.epochs = 3;
    tc.seed = 5;

    const std::string log_a = "train_log_a.csv";
    Model a(cfg), b(cfg);
    const TrainResult ra = train_model(a, train, val, tc, log_a, Exec::Parallel);
    const TrainResult rb = train_model(b, train, val, tc, "", Exec::Serial);

    // bitwise identical across runs and execution modes
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.params().size(); ++i)
        diff += a.params()[i] != b.params()[i];
    CHECK(diff == 0);
    REQUIRE(ra.log.size() == rb.log.size());
    for (std::size_t i = 0; i < ra.log.size(); ++i) {
        CHECK(ra.log[i].train_rmse == rb.log[i].train_rmse);
        CHECK(ra.log[i].val_rmse == rb.log[i].val_rmse);
        CHECK(ra.log[i].lr == rb.log[i].lr);
    }

    // the returned parameters reproduce the reported best validation loss
    CHECK(dataset_loss(a, val, Exec::Parallel) == doctest::Approx(ra.best_val).epsilon(1e-12));
    double min_val = ra.best_val;
    for (const auto& row : ra.log) min_val = std::min(min_val, row.val_rmse);
    CHECK(ra.best_val == doctest::Approx(min_val));

    // CSV log: header plus one row per epoch, values matching the result
    std::ifstream f(log_a);
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);
    CHECK(line == "epoch,lr,train_rmse,val_rmse");
    int rows = 0;
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string tok;
        std::getline(is, tok, ',');
        CHECK(std::stoi(tok) == rows);
        std::getline(is, tok, ',');
        CHECK(std::stod(tok) == doctest::Approx(ra.log[rows].lr).epsilon(1e-9));
        std::getline(is, tok, ',');
        CHECK(std::stod(tok) == doctest::Approx(ra.log[rows].train_rmse).epsilon(1e-9));
        std::getline(is, tok, ',');
        CHECK(std::stod(tok) == doctest::Approx(ra.log[rows].val_rmse).epsilon(1e-9));
        ++rows;
    }
    CHECK(rows == tc.epochs);
    std::remove(log_a.c_str());
}

TEST_CASE("training edge cases: zero epochs, bad config, divergence") {
    const PackedDataset train = synth_packed(8, 700);
    const PackedDataset val = synth_packed(2, 701);
    ModelConfig cfg = small_cfg();

    SUBCASE("epochs = 0 returns the initialized model") {
        TrainConfig tc;
        tc.epochs = 0;
        tc.seed = 3;
        Model m(cfg);
        const TrainResult res = train_model(m, train, val, tc, "", Exec::Parallel);
        CHECK(res.log.empty());
        CHECK(res.best_epoch == -1);
        Model expect(cfg);
        expect.init(tc.seed);
        init_statistical_layer(expect, train);
        CHECK(m.params() == expect.params());
    }

    SUBCASE("invalid batch size throws") {
        TrainConfig tc;
        tc.batch_size = 0;
        Model m(cfg);
        CHECK_THROWS(train_model(m, train, val, tc, "", Exec::Serial));
    }

    SUBCASE("absurd learning rate raises the divergence error") {
        TrainConfig tc;
        tc.lr0 = 1e200;
        tc.epochs = 2;
        Model m(cfg);
        CHECK_THROWS(train_model(m, train, val, tc, "", Exec::Serial));
    }
}
