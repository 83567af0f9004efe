// Serial vs OpenMP benchmark for the hot kernels. Each kernel runs both
// executors on identical inputs; we report per-call wall time (median of
// `reps`) and the parallel speedup. Outputs are also compared bitwise, so a
// run doubles as a quick determinism spot check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "mapfix/features.hpp"
#include "mapfix/model.hpp"
#include "mapfix/nn.hpp"
#include "mapfix/rng.hpp"
#include "mapfix/scene.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace mapfix;
using Clock = std::chrono::steady_clock;

namespace {

double time_median(int reps, const std::function<void()>& fn) {
    std::vector<double> t(reps);
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        t[i] = std::chrono::duration<double>(Clock::now() - t0).count();
    }
    std::sort(t.begin(), t.end());
    return t[reps / 2];
}

void fill(std::vector<float>& v, Rng& rng) {
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
}

void fill(std::vector<double>& v, Rng& rng) {
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
}

struct Row {
    const char* name;
    double serial_ms;
    double parallel_ms;
    bool bitwise;
};

void print_row(const Row& r) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   %s\n", r.name, r.serial_ms,
                r.parallel_ms, r.serial_ms / r.parallel_ms,
                r.bitwise ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int reps = 9;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--reps") == 0) reps = std::atoi(argv[i + 1]);

#if defined(_OPENMP)
    std::printf("OpenMP threads: %d, reps per kernel: %d\n", omp_get_max_threads(), reps);
#else
    std::printf("OpenMP disabled at build time; both columns run serial. reps: %d\n", reps);
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    Rng rng(4242);

    // conv2d: the corridor stack shape seen in training (batched over slots).
    {
        const int ic = 8, oc = 8, h = 64, w = 64;
        std::vector<double> in(ic * h * w), wt(oc * ic * 25), bias(oc);
        std::vector<double> out_s(oc * h * w), out_p(oc * h * w);
        fill(in, rng);
        fill(wt, rng);
        fill(bias, rng);
        Row r{"conv2d 8->8 64x64", 0, 0, false};
        r.serial_ms = 1e3 * time_median(reps, [&] {
            conv2d_forward(in.data(), ic, h, w, wt.data(), bias.data(), oc,
                           out_s.data(), Exec::Serial);
        });
        r.parallel_ms = 1e3 * time_median(reps, [&] {
            conv2d_forward(in.data(), ic, h, w, wt.data(), bias.data(), oc,
                           out_p.data(), Exec::Parallel);
        });
        r.bitwise = std::memcmp(out_s.data(), out_p.data(),
                                out_s.size() * sizeof(double)) == 0;
        print_row(r);
    }

    // dense: the d1/d2 trunk size, repeated to get out of noise.
    {
        const int in_dim = 256, out_dim = 256, loops = 64;
        std::vector<double> in(in_dim), wt(out_dim * in_dim), bias(out_dim);
        std::vector<double> out_s(out_dim), out_p(out_dim);
        fill(in, rng);
        fill(wt, rng);
        fill(bias, rng);
        Row r{"dense 256->256 x64", 0, 0, false};
        r.serial_ms = 1e3 * time_median(reps, [&] {
            for (int l = 0; l < loops; ++l)
                dense_forward(in.data(), in_dim, wt.data(), bias.data(), out_dim,
                              out_s.data(), Exec::Serial);
        });
        r.parallel_ms = 1e3 * time_median(reps, [&] {
            for (int l = 0; l < loops; ++l)
                dense_forward(in.data(), in_dim, wt.data(), bias.data(), out_dim,
                              out_p.data(), Exec::Parallel);
        });
        r.bitwise = std::memcmp(out_s.data(), out_p.data(),
                                out_s.size() * sizeof(double)) == 0;
        print_row(r);
    }

    // full model forward and forward+backward on one sample.
    {
        ModelConfig mc;
        Model ms(mc), mp(mc);
        ms.init(5);
        mp.init(5);
        std::vector<float> geo(kNumSlots * kGeoFeatDim);
        std::vector<float> cor(kNumSlots * kCorridorRows * kCorridorCols);
        fill(geo, rng);
        for (auto& g : geo) g = 20.0f * std::abs(g);
        fill(cor, rng);
        std::vector<double> out_s(2 * kNumSlots), out_p(2 * kNumSlots);
        Workspace ws_s(mc), ws_p(mc);

        Row f{"model forward", 0, 0, false};
        f.serial_ms = 1e3 * time_median(reps, [&] {
            ms.forward(geo.data(), cor.data(), ws_s, out_s.data(), Exec::Serial);
        });
        f.parallel_ms = 1e3 * time_median(reps, [&] {
            mp.forward(geo.data(), cor.data(), ws_p, out_p.data(), Exec::Parallel);
        });
        f.bitwise = std::memcmp(out_s.data(), out_p.data(),
                                out_s.size() * sizeof(double)) == 0;
        print_row(f);

        std::vector<double> grad_out(2 * kNumSlots);
        fill(grad_out, rng);
        std::vector<double> gs(ms.layout().trainable, 0.0),
            gp(mp.layout().trainable, 0.0);
        Row b{"model forward+backward", 0, 0, false};
        b.serial_ms = 1e3 * time_median(reps, [&] {
            ms.forward(geo.data(), cor.data(), ws_s, out_s.data(), Exec::Serial);
            std::fill(gs.begin(), gs.end(), 0.0);
            ms.backward(grad_out.data(), ws_s, gs.data(), Exec::Serial);
        });
        b.parallel_ms = 1e3 * time_median(reps, [&] {
            mp.forward(geo.data(), cor.data(), ws_p, out_p.data(), Exec::Parallel);
            std::fill(gp.begin(), gp.end(), 0.0);
            mp.backward(grad_out.data(), ws_p, gp.data(), Exec::Parallel);
        });
        b.bitwise = std::memcmp(gs.data(), gp.data(), gs.size() * sizeof(double)) == 0;
        print_row(b);
    }

    // feature extraction on a real generated scene (the labeling hot path).
    {
        SceneParams sp;
        const Scene sc = generate_scene(Case::B6Multi, 123, sp);
        const ElevationGrid grid = rasterize(sc, 128);
        std::vector<float> geo_s(kNumSlots * kGeoFeatDim), geo_p(geo_s.size());
        std::vector<float> cor_s(kNumSlots * kCorridorRows * kCorridorCols),
            cor_p(cor_s.size());
        Row r{"geometric_features 6m", 0, 0, false};
        r.serial_ms = 1e3 * time_median(reps, [&] {
            geometric_features(grid, PathMode::MultiPath, geo_s, Exec::Serial);
        });
        r.parallel_ms = 1e3 * time_median(reps, [&] {
            geometric_features(grid, PathMode::MultiPath, geo_p, Exec::Parallel);
        });
        r.bitwise = std::memcmp(geo_s.data(), geo_p.data(),
                                geo_s.size() * sizeof(float)) == 0;
        print_row(r);

        Row rc{"corridor_tensor", 0, 0, false};
        rc.serial_ms = 1e3 * time_median(reps, [&] {
            corridor_tensor(grid, cor_s, Exec::Serial);
        });
        rc.parallel_ms = 1e3 * time_median(reps, [&] {
            corridor_tensor(grid, cor_p, Exec::Parallel);
        });
        rc.bitwise = std::memcmp(cor_s.data(), cor_p.data(),
                                 cor_s.size() * sizeof(float)) == 0;
        print_row(rc);
    }

    return 0;
}
