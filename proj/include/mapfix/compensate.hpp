#pragma once
// Online correction (Eq. 3): look up the predicted DA error at the Rx slot
// nearest a rough TDOA fix and subtract the error vector.

#include <array>

#include "mapfix/labeling.hpp"

namespace mapfix {

// Index of the lattice slot nearest to p; ties keep the lower index.
int nearest_rx(const std::array<Vec3, 120>& rx, const Vec2& p);

// x = x' - r cos(theta), y = y' - r sin(theta).
Vec2 apply_compensation(const Vec2& fix, const DaError& da);

// Predicted r inside 2% of the 50 m cap marks the sentinel region ("model
// says infeasible"); the fix is returned unmodified there.
inline constexpr double kSentinelGuard = 50.0 * 0.98;

Vec2 compensate_fix(const Vec2& fix, const std::array<Vec3, 120>& rx,
                    const std::array<DaError, 120>& predicted);

}  // namespace mapfix
