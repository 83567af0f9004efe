#pragma once
// Scene synthesis: randomized urban layouts for the four dataset cases plus
// rasterization to elevation grids.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mapfix/geometry.hpp"

namespace mapfix {

enum class PathMode { SinglePath, MultiPath };

// The four dataset cases: {3, 6} buildings x {single, multi} path.
enum class Case { B3Single, B3Multi, B6Single, B6Multi };

int case_building_count(Case c);
PathMode case_mode(Case c);
const char* case_name(Case c);              // "3s", "3m", "6s", "6m"
bool parse_case(const std::string& s, Case& out);
int case_index(Case c);                     // 0..3, stable across runs

struct Building {
    double x_min = 0.0;
    double y_min = 0.0;
    double width = 0.0;
    double depth = 0.0;
    double height = 0.0;

    Aabb box() const {
        return {{x_min, y_min, 0.0}, {x_min + width, y_min + depth, height}};
    }
    bool contains_xy(double x, double y) const {
        return x >= x_min && x <= x_min + width && y >= y_min && y <= y_min + depth;
    }
};

struct SceneParams {
    double extent = 512.0;        // square side L in meters
    int raster_size = 128;        // desk 128 (4 m/cell); nominal 512 (1 m/cell)
    double side_min = 30.0;       // building footprint side range
    double side_max = 80.0;
    double height_min = 5.0;
    double height_max = 10.0;
    double tx_height = 10.0;
    double rx_height = 1.0;
    double lattice_margin = 0.05; // Rx inset as a fraction of extent
    int max_place_attempts = 1000;
};

// Fixed Tx constellation, as fractions of the extent. One central station
// plus six on the boundary, placed asymmetrically; see the README for why
// this differs from a regular ring (bounded GDOP under station dropout).
std::array<Vec2, 7> tx_constellation_frac();

struct Scene {
    double extent = 512.0;
    PathMode mode = PathMode::SinglePath;
    std::uint64_t seed = 0;
    std::vector<Building> buildings;
    std::array<Vec3, 7> tx{};
    std::array<Vec3, 120> rx{};
};

struct ElevationGrid {
    int h = 0;
    int w = 0;
    float resolution = 0.0f;      // meters per cell
    std::vector<float> cells;     // row-major, cells[i*w + j]

    float at(int i, int j) const { return cells[static_cast<std::size_t>(i) * w + j]; }
};

// 12 x 10 equal-interval lattice, row-major from the south-west corner.
std::array<Vec3, 120> rx_lattice(const SceneParams& p);
std::array<Vec3, 7> tx_positions(const SceneParams& p);

// Deterministic in (case, seed). Throws std::runtime_error when a
// non-overlapping placement cannot be found (overly full configuration).
Scene generate_scene(Case c, std::uint64_t seed, const SceneParams& p = {});

// Cell value = height of the tallest building covering the cell center.
ElevationGrid rasterize(const Scene& scene, int size);

// Scene file round trip (one self-describing JSON object).
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

// ELEV binary format: magic "ELEV", u32 H, u32 W, f32 resolution,
// then H*W f32 row-major heights. Little-endian.
void write_elevation(const std::string& path, const ElevationGrid& g);
ElevationGrid read_elevation(const std::string& path);

}  // namespace mapfix
