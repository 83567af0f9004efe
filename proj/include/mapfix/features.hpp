#pragma once
// Fixed, parameter-free input transforms for the predictor. The elevation
// raster is the model's only scene input; these routines turn it into
// (a) per-slot geometric features obtained by reconstructing the building
// boxes from the raster and re-simulating the TOA -> TDOA chain on the
// reconstruction, and (b) per-slot clearance corridors resampled along each
// station's direct ray, which feed the convolutional branch. Both are pure
// functions of the grid, so training can cache them per sample.

#include <vector>

#include "mapfix/parallel.hpp"
#include "mapfix/scene.hpp"

namespace mapfix {

inline constexpr int kGeoFeatDim = 28;
inline constexpr int kCorridorRows = 7;   // one row per station
inline constexpr int kCorridorCols = 48;  // samples along the direct ray

// One box per distinct positive cell value. Footprints never overlap, so the
// cells sharing a height form a single rectangle (height ties have measure
// zero under the continuous height draw); the bounding box of those cells
// recovers the footprint to within one cell.
std::vector<Building> reconstruct_buildings(const ElevationGrid& grid);

// Per-slot feature block, row-major 120 x kGeoFeatDim:
//   [0]  vx   raster-predicted DA-error vector, fix_x - rx_x (m)
//   [1]  vy
//   [2]  rhat |v| capped at 50 m
//   [3]  feasible (re-simulated solve ran: not covered, >= 3 detected)
//   [4..10]  detection pattern bit per station (quantized, no jitter)
//   [11..17] min vertical clearance of each direct ray over the raster (m)
//   [18..24] reflection detour per station, shortest - direct, capped 100 m
//   [25] detected-station count
//   [26] rx x  [27] rx y
// All values raw (meters); the model applies its fixed normalization.
void geometric_features(const ElevationGrid& grid, PathMode mode,
                        std::vector<float>& out, Exec exec = Exec::Parallel);

// Clearance corridors, row-major 120 x 7 x 48: sample i of row j holds
// (LOS height - raster height) / 10 at t = (i + 0.5)/48 along the ray from
// the slot to station j. Negative values mark blocked stretches.
void corridor_tensor(const ElevationGrid& grid, std::vector<float>& out,
                     Exec exec = Exec::Parallel);

}  // namespace mapfix
