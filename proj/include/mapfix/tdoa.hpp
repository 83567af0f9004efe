#pragma once
// Station selection and the 2D TDOA solve of Eq. 1.

#include <array>
#include <vector>

#include "mapfix/geometry.hpp"
#include "mapfix/link.hpp"

namespace mapfix {

struct TdoaFix {
    Vec2 position{};
    double residual = 0.0;       // root-sum-square of TDOA equation residuals
    bool feasible = false;
    bool degenerate = false;     // near-collinear selected stations
    std::array<int, 3> used_bs = {-1, -1, -1};
};

struct TdoaParams {
    double extent = 512.0;   // grid-seed search span and clamp scale
    double grid_pitch = 8.0;
    double ue_height = 1.0;
    int max_iters = 100;
    double step_tol = 1e-6;  // meters
};

// Detected stations sorted by TOA (stable: ties keep lower Tx index).
// Fewer than 3 detected -> empty (infeasible).
std::vector<int> select_stations(const std::array<ToaMeasurement, 7>& toas);

// Spec-shaped solve: exactly three stations, two TDOA equations.
// Coarse grid seed over the extent, then damped Gauss-Newton, clamped to
// [-L, 2L]^2.
TdoaFix solve_tdoa(const std::array<Vec3, 3>& bs, const std::array<double, 3>& toas,
                   const TdoaParams& p = {});

// Full per-Rx solve used by the labeling pipeline: the earliest three
// detected stations form the Eq. 1 system, but the coarse grid seed scores
// TDOA residuals against *all* detected stations, which disambiguates
// hyperbola branches when the three selected ones are nearly degenerate.
TdoaFix solve_fix(const std::array<Vec3, 7>& tx,
                  const std::array<ToaMeasurement, 7>& toas, const TdoaParams& p = {});

}  // namespace mapfix
