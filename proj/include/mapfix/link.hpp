#pragma once
// Link level: propagation paths -> channel impulse response -> detected TOA,
// with bandwidth-limited quantization and a relative-magnitude first-path
// rule standing in for the Table 1 OFDM receiver.

#include <cstdint>
#include <vector>

#include "mapfix/raytrace.hpp"

namespace mapfix {

// Speed of light, the c of Eq. 1.
constexpr double kSpeedOfLight = 299792458.0;

struct ChannelTap {
    double delay = 0.0;      // seconds
    double amplitude = 0.0;  // linear
};

struct ChannelResponse {
    std::vector<ChannelTap> taps;  // sorted ascending by delay
};

enum class ToaStatus { Detected, Unreachable };

struct ToaMeasurement {
    int tx = 0;
    int rx = 0;
    ToaStatus status = ToaStatus::Unreachable;
    double toa = 0.0;  // seconds, valid when Detected
};

struct LinkConfig {
    double carrier_hz = 4e9;
    double bandwidth_hz = 4e8;
    double rel_threshold_db = -10.0;
    double noise_figure_db = 9.0;   // recorded for fidelity; folded into jitter_std
    double jitter_std = 1e-9;       // timing error stand-in, seconds
    std::uint64_t seed = 0;         // scene seed; jitter keyed per (seed, tx, rx)

    double sampling_period() const { return 1.0 / bandwidth_hz; }
};

// One tap per path: delay = length / c, amplitude = path gain.
ChannelResponse build_cir(const std::vector<PropagationPath>& paths);

// Empty CIR -> Unreachable. Otherwise the earliest tap within
// rel_threshold_db of the strongest, quantized to Ts = 1/bandwidth and
// jittered by a zero-mean Gaussian keyed on (cfg.seed, tx, rx).
ToaMeasurement detect_first_path(const ChannelResponse& cir, const LinkConfig& cfg,
                                 int tx, int rx);

// Fast equivalent of enumerate_paths + build_cir + detect_first_path for the
// free-space amplitude model, where the earliest tap is always the strongest.
// The equivalence is asserted in tests.
ToaMeasurement measure_toa(const Scene& scene, const LinkConfig& cfg, int tx, int rx);

}  // namespace mapfix
