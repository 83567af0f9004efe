#include "mapfix/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mapfix/link.hpp"
#include "mapfix/raytrace.hpp"
#include "mapfix/tdoa.hpp"

namespace mapfix {

std::vector<Building> reconstruct_buildings(const ElevationGrid& grid) {
    struct Extent {
        int i0, i1, j0, j1;
    };
    std::map<float, Extent> groups;  // ordered -> deterministic building order
    for (int i = 0; i < grid.h; ++i) {
        for (int j = 0; j < grid.w; ++j) {
            const float v = grid.at(i, j);
            if (v <= 0.0f) continue;
            auto [it, fresh] = groups.try_emplace(v, Extent{i, i, j, j});
            if (!fresh) {
                Extent& e = it->second;
                e.i0 = std::min(e.i0, i);
                e.i1 = std::max(e.i1, i);
                e.j0 = std::min(e.j0, j);
                e.j1 = std::max(e.j1, j);
            }
        }
    }
    const double res = grid.resolution;
    std::vector<Building> out;
    out.reserve(groups.size());
    for (const auto& [h, e] : groups) {
        Building b;
        b.x_min = e.j0 * res;
        b.y_min = e.i0 * res;
        b.width = (e.j1 - e.j0 + 1) * res;
        b.depth = (e.i1 - e.i0 + 1) * res;
        b.height = h;
        out.push_back(b);
    }
    return out;
}

namespace {

float elev_at(const ElevationGrid& g, double px, double py) {
    int j = static_cast<int>(px / g.resolution);
    int i = static_cast<int>(py / g.resolution);
    j = std::clamp(j, 0, g.w - 1);
    i = std::clamp(i, 0, g.h - 1);
    return g.at(i, j);
}

Scene reconstructed_scene(const ElevationGrid& grid, PathMode mode) {
    SceneParams p;
    p.extent = grid.w * static_cast<double>(grid.resolution);
    Scene s;
    s.extent = p.extent;
    s.mode = mode;
    s.buildings = reconstruct_buildings(grid);
    s.tx = tx_positions(p);
    s.rx = rx_lattice(p);
    return s;
}

}  // namespace

void geometric_features(const ElevationGrid& grid, PathMode mode,
                        std::vector<float>& out, Exec exec) {
    const Scene recon = reconstructed_scene(grid, mode);
    LinkConfig link;  // defaults; re-simulation is quantized but jitter-free
    const double ts = link.sampling_period();

    TdoaParams tp;
    tp.extent = recon.extent;

    out.assign(static_cast<std::size_t>(120) * kGeoFeatDim, 0.0f);
    parallel_for(120, exec, [&](std::size_t k) {
        float* f = out.data() + k * kGeoFeatDim;
        const Vec3& ue = recon.rx[k];

        std::array<ToaMeasurement, 7> toas{};
        int ndet = 0;
        for (int j = 0; j < 7; ++j) {
            const double len = shortest_path_length(recon, j, static_cast<int>(k));
            const double direct = dist(recon.tx[j], ue);
            auto& m = toas[j];
            m.tx = j;
            m.rx = static_cast<int>(k);
            if (std::isfinite(len)) {
                m.status = ToaStatus::Detected;
                m.toa = std::round((len / kSpeedOfLight) / ts) * ts;
                f[4 + j] = 1.0f;
                f[18 + j] = static_cast<float>(std::min(len - direct, 100.0));
                ++ndet;
            } else {
                f[18 + j] = 100.0f;
            }

            // Vertical clearance profile of the direct ray.
            const int n = std::max(static_cast<int>(direct / 2.0), 8);
            double clr = 1e30;
            for (int i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / (n - 1);
                const double px = ue.x + t * (recon.tx[j].x - ue.x);
                const double py = ue.y + t * (recon.tx[j].y - ue.y);
                const double pz = ue.z + t * (recon.tx[j].z - ue.z);
                clr = std::min(clr, pz - elev_at(grid, px, py));
            }
            f[11 + j] = static_cast<float>(clr);
        }

        bool covered = false;
        for (const Building& b : recon.buildings) {
            if (b.contains_xy(ue.x, ue.y)) {
                covered = true;
                break;
            }
        }

        f[2] = 50.0f;
        if (!covered && ndet >= 3) {
            const TdoaFix fix = solve_fix(recon.tx, toas, tp);
            const double vx = fix.position.x - ue.x;
            const double vy = fix.position.y - ue.y;
            f[0] = static_cast<float>(vx);
            f[1] = static_cast<float>(vy);
            f[2] = static_cast<float>(std::min(std::hypot(vx, vy), 50.0));
            f[3] = 1.0f;
        }
        f[25] = static_cast<float>(ndet);
        f[26] = static_cast<float>(ue.x);
        f[27] = static_cast<float>(ue.y);
    });
}

void corridor_tensor(const ElevationGrid& grid, std::vector<float>& out, Exec exec) {
    SceneParams p;
    p.extent = grid.w * static_cast<double>(grid.resolution);
    const auto tx = tx_positions(p);
    const auto rx = rx_lattice(p);

    out.assign(static_cast<std::size_t>(120) * kCorridorRows * kCorridorCols, 0.0f);
    parallel_for(120, exec, [&](std::size_t k) {
        float* img = out.data() + k * kCorridorRows * kCorridorCols;
        for (int j = 0; j < kCorridorRows; ++j) {
            for (int i = 0; i < kCorridorCols; ++i) {
                const double t = (i + 0.5) / kCorridorCols;
                const double px = rx[k].x + t * (tx[j].x - rx[k].x);
                const double py = rx[k].y + t * (tx[j].y - rx[k].y);
                const double pz = rx[k].z + t * (tx[j].z - rx[k].z);
                img[j * kCorridorCols + i] =
                    static_cast<float>((pz - elev_at(grid, px, py)) / 10.0);
            }
        }
    });
}

}  // namespace mapfix
