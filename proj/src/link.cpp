#include "mapfix/link.hpp"

#include <algorithm>
#include <cmath>

#include "mapfix/rng.hpp"

namespace mapfix {

namespace {

double quantize_and_jitter(double delay, const LinkConfig& cfg, int tx, int rx) {
    const double ts = cfg.sampling_period();
    double toa = std::round(delay / ts) * ts;
    if (cfg.jitter_std > 0.0) {
        Rng rng(derive_seed({cfg.seed, static_cast<std::uint64_t>(tx),
                             static_cast<std::uint64_t>(rx)}));
        toa += rng.gauss() * cfg.jitter_std;
    }
    return toa;
}

}  // namespace

ChannelResponse build_cir(const std::vector<PropagationPath>& paths) {
    ChannelResponse cir;
    cir.taps.reserve(paths.size());
    for (const PropagationPath& p : paths) {
        cir.taps.push_back({p.length / kSpeedOfLight, p.gain});
    }
    std::sort(cir.taps.begin(), cir.taps.end(),
              [](const ChannelTap& a, const ChannelTap& b) { return a.delay < b.delay; });
    return cir;
}

ToaMeasurement detect_first_path(const ChannelResponse& cir, const LinkConfig& cfg,
                                 int tx, int rx) {
    ToaMeasurement m;
    m.tx = tx;
    m.rx = rx;
    if (cir.taps.empty()) {
        m.status = ToaStatus::Unreachable;
        return m;
    }
    double peak = 0.0;
    for (const ChannelTap& t : cir.taps) peak = std::max(peak, t.amplitude);
    const double thresh = peak * std::pow(10.0, cfg.rel_threshold_db / 20.0);
    for (const ChannelTap& t : cir.taps) {
        if (t.amplitude >= thresh) {
            m.status = ToaStatus::Detected;
            m.toa = quantize_and_jitter(t.delay, cfg, tx, rx);
            return m;
        }
    }
    // Unreachable with a non-empty CIR cannot happen: the peak qualifies.
    m.status = ToaStatus::Detected;
    m.toa = quantize_and_jitter(cir.taps.back().delay, cfg, tx, rx);
    return m;
}

ToaMeasurement measure_toa(const Scene& scene, const LinkConfig& cfg, int tx, int rx) {
    ToaMeasurement m;
    m.tx = tx;
    m.rx = rx;
    const double len = shortest_path_length(scene, tx, rx);
    if (!std::isfinite(len)) {
        m.status = ToaStatus::Unreachable;
        return m;
    }
    m.status = ToaStatus::Detected;
    m.toa = quantize_and_jitter(len / kSpeedOfLight, cfg, tx, rx);
    return m;
}

}  // namespace mapfix
