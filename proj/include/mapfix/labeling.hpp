#pragma once
// DA-error labels per Rx and dataset assembly for the four cases.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mapfix/link.hpp"
#include "mapfix/parallel.hpp"
#include "mapfix/scene.hpp"
#include "mapfix/tdoa.hpp"

namespace mapfix {

struct DaError {
    double r = 50.0;      // meters, capped at the 50 m worst case
    double theta = 0.0;   // radians in [-pi, pi)
};

constexpr double kWorstCaseLabel = 50.0;

struct Sample {
    ElevationGrid grid;
    std::array<DaError, 120> labels{};
    std::array<std::uint8_t, 120> mask{};   // 1 = feasible, genuine TDOA label
    std::array<Vec2, 120> fix{};            // raw TDOA fix (when feasible)
    // Diagnostics stored alongside the labels.
    std::array<std::array<std::uint8_t, 3>, 120> used_bs{};  // 0xFF when unused
    std::array<std::uint8_t, 120> det_mask{};                // bit j = Tx j detected
    Case case_id = Case::B3Single;
    std::uint64_t seed = 0;
};

// r = min(|fix - truth|, 50), theta = atan2 so that Eq. 3 applied to the fix
// with the uncapped r returns the truth exactly. atan2's +pi endpoint is
// wrapped to -pi to keep theta in [-pi, pi).
DaError compute_da_error(const Vec2& truth, const Vec2& fix);

// raytrace -> link -> tdoa -> labels for all 120 Rx. Rx covered by a
// building or with fewer than 3 detected stations get (50, 0), mask = 0.
Sample build_sample(const Scene& scene, const LinkConfig& link_cfg,
                    const TdoaParams& tdoa_prm, int raster_size,
                    Exec mode = Exec::Serial);

struct DatasetCounts {
    int train = 300;
    int val = 50;
    int test = 20;
};

// Deterministic per-split seeds derived from (master_seed, case, global
// index); writes one DAER file per sample plus a manifest. Returns the
// manifest path.
std::string build_dataset(Case c, const DatasetCounts& counts, std::uint64_t master_seed,
                          const std::string& out_dir, const LinkConfig& link_cfg,
                          const TdoaParams& tdoa_prm, const SceneParams& scene_prm,
                          int raster_size, Exec mode);

// DAER binary format: magic "DAER", u32 version, embedded ELEV block,
// u32 count = 120, then per Rx: f32 r, f32 theta, u8 mask, f32 fix_x,
// f32 fix_y. A trailing "DIAG" block carries used_bs and the detection
// bitmask per Rx.
void write_sample(const std::string& path, const Sample& s);
Sample read_sample(const std::string& path);

struct Manifest {
    Case case_id = Case::B3Single;
    std::uint64_t master_seed = 0;
    std::vector<std::string> train;  // paths relative to the manifest dir
    std::vector<std::string> val;
    std::vector<std::string> test;
};

void write_manifest(const std::string& path, const Manifest& m);
Manifest read_manifest(const std::string& path);

// Scene seed for the gi-th sample of a case (gi counts across splits:
// train first, then val, then test).
std::uint64_t sample_seed(std::uint64_t master_seed, Case c, int global_index);

}  // namespace mapfix
