#include "mapfix/scene.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mapfix/rng.hpp"

namespace mapfix {

int case_building_count(Case c) {
    return (c == Case::B3Single || c == Case::B3Multi) ? 3 : 6;
}

PathMode case_mode(Case c) {
    return (c == Case::B3Single || c == Case::B6Single) ? PathMode::SinglePath
                                                        : PathMode::MultiPath;
}

const char* case_name(Case c) {
    switch (c) {
        case Case::B3Single: return "3s";
        case Case::B3Multi: return "3m";
        case Case::B6Single: return "6s";
        case Case::B6Multi: return "6m";
    }
    return "?";
}

bool parse_case(const std::string& s, Case& out) {
    if (s == "3s") { out = Case::B3Single; return true; }
    if (s == "3m") { out = Case::B3Multi; return true; }
    if (s == "6s") { out = Case::B6Single; return true; }
    if (s == "6m") { out = Case::B6Multi; return true; }
    return false;
}

int case_index(Case c) {
    switch (c) {
        case Case::B3Single: return 0;
        case Case::B3Multi: return 1;
        case Case::B6Single: return 2;
        case Case::B6Multi: return 3;
    }
    return -1;
}

std::array<Vec2, 7> tx_constellation_frac() {
    // Center + six boundary stations. Coordinates were tuned (offline search)
    // so that (a) the all-LOS quantization-limited fix error stays under the
    // c*Ts*sqrt(2) bound at every lattice point, and (b) no 3-subset that
    // survives one, two or three station dropouts is close to collinear,
    // which keeps NLOS-induced fixes bounded instead of flying off the map.
    return {{{0.5, 0.5},
             {0.400306, 0.0},
             {1.0, 0.126643},
             {1.0, 0.862247},
             {0.371666, 1.0},
             {0.0, 0.759474},
             {0.0, 0.283036}}};
}

std::array<Vec3, 120> rx_lattice(const SceneParams& p) {
    std::array<Vec3, 120> rx{};
    const double lo = p.lattice_margin * p.extent;
    const double span = (1.0 - 2.0 * p.lattice_margin) * p.extent;
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 12; ++c) {
            rx[r * 12 + c] = {lo + c * (span / 11.0), lo + r * (span / 9.0),
                              p.rx_height};
        }
    }
    return rx;
}

std::array<Vec3, 7> tx_positions(const SceneParams& p) {
    std::array<Vec3, 7> tx{};
    const auto frac = tx_constellation_frac();
    for (int i = 0; i < 7; ++i) {
        tx[i] = {frac[i].x * p.extent, frac[i].y * p.extent, p.tx_height};
    }
    return tx;
}

Scene generate_scene(Case c, std::uint64_t seed, const SceneParams& p) {
    Scene scene;
    scene.extent = p.extent;
    scene.mode = case_mode(c);
    scene.seed = seed;
    scene.tx = tx_positions(p);
    scene.rx = rx_lattice(p);

    const int n = case_building_count(c);
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(n)}));
    for (int b = 0; b < n; ++b) {
        bool placed = false;
        for (int attempt = 0; attempt < p.max_place_attempts; ++attempt) {
            Building cand;
            cand.width = rng.uniform(p.side_min, p.side_max);
            cand.depth = rng.uniform(p.side_min, p.side_max);
            cand.x_min = rng.uniform(0.0, p.extent - cand.width);
            cand.y_min = rng.uniform(0.0, p.extent - cand.depth);
            cand.height = rng.uniform(p.height_min, p.height_max);

            bool ok = true;
            for (const Building& o : scene.buildings) {
                if (cand.x_min < o.x_min + o.width && o.x_min < cand.x_min + cand.width &&
                    cand.y_min < o.y_min + o.depth && o.y_min < cand.y_min + cand.depth) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                for (const Vec3& t : scene.tx) {
                    if (cand.contains_xy(t.x, t.y)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) {
                scene.buildings.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw std::runtime_error("generate_scene: placement failure (configuration too full)");
        }
    }
    return scene;
}

ElevationGrid rasterize(const Scene& scene, int size) {
    ElevationGrid g;
    g.h = size;
    g.w = size;
    g.resolution = static_cast<float>(scene.extent / size);
    g.cells.assign(static_cast<std::size_t>(size) * size, 0.0f);
    const double res = scene.extent / size;
    for (const Building& b : scene.buildings) {
        // Cells whose center (index + 0.5) * res falls inside the footprint.
        const int j0 = std::max(0, static_cast<int>(std::ceil(b.x_min / res - 0.5)));
        const int j1 = std::min(size - 1,
                                static_cast<int>(std::floor((b.x_min + b.width) / res - 0.5)));
        const int i0 = std::max(0, static_cast<int>(std::ceil(b.y_min / res - 0.5)));
        const int i1 = std::min(size - 1,
                                static_cast<int>(std::floor((b.y_min + b.depth) / res - 0.5)));
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                float& cell = g.cells[static_cast<std::size_t>(i) * size + j];
                cell = std::max(cell, static_cast<float>(b.height));
            }
        }
    }
    return g;
}

std::string scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["extent_m"] = scene.extent;
    j["mode"] = scene.mode == PathMode::SinglePath ? "single" : "multi";
    j["seed"] = scene.seed;
    auto& bl = j["buildings"] = nlohmann::json::array();
    for (const Building& b : scene.buildings) {
        bl.push_back({{"x_min", b.x_min},
                      {"y_min", b.y_min},
                      {"width", b.width},
                      {"depth", b.depth},
                      {"height", b.height}});
    }
    auto& tx = j["tx"] = nlohmann::json::array();
    for (const Vec3& t : scene.tx) tx.push_back({t.x, t.y, t.z});
    auto& rx = j["rx"] = nlohmann::json::array();
    for (const Vec3& r : scene.rx) rx.push_back({r.x, r.y, r.z});
    return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Scene scene;
    scene.extent = j.at("extent_m").get<double>();
    scene.mode = j.at("mode").get<std::string>() == "single" ? PathMode::SinglePath
                                                             : PathMode::MultiPath;
    scene.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& b : j.at("buildings")) {
        scene.buildings.push_back({b.at("x_min").get<double>(), b.at("y_min").get<double>(),
                                   b.at("width").get<double>(), b.at("depth").get<double>(),
                                   b.at("height").get<double>()});
    }
    const auto& tx = j.at("tx");
    for (std::size_t i = 0; i < 7; ++i) {
        scene.tx[i] = {tx[i][0].get<double>(), tx[i][1].get<double>(), tx[i][2].get<double>()};
    }
    const auto& rx = j.at("rx");
    for (std::size_t i = 0; i < 120; ++i) {
        scene.rx[i] = {rx[i][0].get<double>(), rx[i][1].get<double>(), rx[i][2].get<double>()};
    }
    return scene;
}

void write_elevation(const std::string& path, const ElevationGrid& g) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_elevation: cannot open " + path);
    f.write("ELEV", 4);
    const std::uint32_t h = static_cast<std::uint32_t>(g.h);
    const std::uint32_t w = static_cast<std::uint32_t>(g.w);
    f.write(reinterpret_cast<const char*>(&h), 4);
    f.write(reinterpret_cast<const char*>(&w), 4);
    f.write(reinterpret_cast<const char*>(&g.resolution), 4);
    f.write(reinterpret_cast<const char*>(g.cells.data()),
            static_cast<std::streamsize>(g.cells.size() * sizeof(float)));
    if (!f) throw std::runtime_error("write_elevation: write failed for " + path);
}

ElevationGrid read_elevation(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_elevation: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "ELEV") {
        throw std::runtime_error("read_elevation: bad magic in " + path);
    }
    ElevationGrid g;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    f.read(reinterpret_cast<char*>(&h), 4);
    f.read(reinterpret_cast<char*>(&w), 4);
    f.read(reinterpret_cast<char*>(&g.resolution), 4);
    g.h = static_cast<int>(h);
    g.w = static_cast<int>(w);
    g.cells.resize(static_cast<std::size_t>(g.h) * g.w);
    f.read(reinterpret_cast<char*>(g.cells.data()),
           static_cast<std::streamsize>(g.cells.size() * sizeof(float)));
    if (!f) throw std::runtime_error("read_elevation: truncated file " + path);
    return g;
}

}  // namespace mapfix
