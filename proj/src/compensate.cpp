#include "mapfix/compensate.hpp"

#include <cmath>

namespace mapfix {

int nearest_rx(const std::array<Vec3, 120>& rx, const Vec2& p) {
    int best = 0;
    double best_d2 = 1e300;
    for (int k = 0; k < 120; ++k) {
        const double dx = rx[k].x - p.x;
        const double dy = rx[k].y - p.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {  // strict: ties keep the lower index
            best_d2 = d2;
            best = k;
        }
    }
    return best;
}

Vec2 apply_compensation(const Vec2& fix, const DaError& da) {
    return {fix.x - da.r * std::cos(da.theta), fix.y - da.r * std::sin(da.theta)};
}

Vec2 compensate_fix(const Vec2& fix, const std::array<Vec3, 120>& rx,
                    const std::array<DaError, 120>& predicted) {
    const DaError& da = predicted[nearest_rx(rx, fix)];
    if (da.r >= kSentinelGuard) return fix;
    return apply_compensation(fix, da);
}

}  // namespace mapfix
