#include "mapfix/tdoa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mapfix {

namespace {

double station_dist(const Vec3& bs, const Vec2& x, double ue_height) {
    const double dx = x.x - bs.x;
    const double dy = x.y - bs.y;
    const double dz = bs.z - ue_height;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct GnSystem {
    std::array<Vec3, 3> p;
    std::array<double, 2> m;  // c * (toa_0 - toa_j), j = 1, 2
    double ue_height;

    // Residuals f_j = m_j - (d_0 - d_j) and distances.
    void resid(const Vec2& x, std::array<double, 2>& f, std::array<double, 3>& d) const {
        for (int i = 0; i < 3; ++i) d[i] = station_dist(p[i], x, ue_height);
        for (int j = 0; j < 2; ++j) f[j] = m[j] - (d[0] - d[j + 1]);
    }
};

double sse(const std::array<double, 2>& f) { return f[0] * f[0] + f[1] * f[1]; }

Vec2 gauss_newton(const GnSystem& sys, Vec2 x, const TdoaParams& prm, double& out_rss) {
    std::array<double, 2> f;
    std::array<double, 3> d;
    sys.resid(x, f, d);
    double fv = sse(f);

    for (int it = 0; it < prm.max_iters; ++it) {
        const double d0 = std::max(d[0], 1e-9);
        const Vec2 g1 = {(x.x - sys.p[0].x) / d0, (x.y - sys.p[0].y) / d0};
        double J[2][2];
        for (int j = 0; j < 2; ++j) {
            const double dj = std::max(d[j + 1], 1e-9);
            J[j][0] = (x.x - sys.p[j + 1].x) / dj - g1.x;
            J[j][1] = (x.y - sys.p[j + 1].y) / dj - g1.y;
        }
        // Normal equations A step = -J^T f for the 2x2 system.
        double a = J[0][0] * J[0][0] + J[1][0] * J[1][0];
        double b = J[0][0] * J[0][1] + J[1][0] * J[1][1];
        double c = J[0][1] * J[0][1] + J[1][1] * J[1][1];
        double det = a * c - b * b;
        if (std::abs(det) < 1e-14) {
            a += 1e-9;
            c += 1e-9;
            det = a * c - b * b;
        }
        const double r0 = -(J[0][0] * f[0] + J[1][0] * f[1]);
        const double r1 = -(J[0][1] * f[0] + J[1][1] * f[1]);
        const Vec2 step = {(c * r0 - b * r1) / det, (a * r1 - b * r0) / det};

        // Damping: halve until the objective improves.
        double alpha = 1.0;
        bool improved = false;
        while (alpha > 1e-6) {
            const Vec2 xn = {x.x + alpha * step.x, x.y + alpha * step.y};
            std::array<double, 2> fn;
            std::array<double, 3> dn;
            sys.resid(xn, fn, dn);
            if (sse(fn) < fv) {
                x = xn;
                f = fn;
                d = dn;
                fv = sse(fn);
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved || (step * alpha).norm() < prm.step_tol) break;
    }
    out_rss = std::sqrt(fv);
    return x;
}

Vec2 clamp_extent(Vec2 x, double extent) {
    x.x = std::clamp(x.x, -extent, 2.0 * extent);
    x.y = std::clamp(x.y, -extent, 2.0 * extent);
    return x;
}

bool near_collinear(const std::array<Vec3, 3>& p, double extent) {
    const double ux = p[1].x - p[0].x, uy = p[1].y - p[0].y;
    const double vx = p[2].x - p[0].x, vy = p[2].y - p[0].y;
    return std::abs(ux * vy - uy * vx) < 1e-6 * extent * extent;
}

}  // namespace

std::vector<int> select_stations(const std::array<ToaMeasurement, 7>& toas) {
    std::vector<int> det;
    for (int i = 0; i < 7; ++i) {
        if (toas[static_cast<std::size_t>(i)].status == ToaStatus::Detected) det.push_back(i);
    }
    if (det.size() < 3) return {};
    std::stable_sort(det.begin(), det.end(), [&](int a, int b) {
        return toas[static_cast<std::size_t>(a)].toa < toas[static_cast<std::size_t>(b)].toa;
    });
    return det;
}

TdoaFix solve_tdoa(const std::array<Vec3, 3>& bs, const std::array<double, 3>& toas,
                   const TdoaParams& prm) {
    GnSystem sys;
    sys.p = bs;
    sys.ue_height = prm.ue_height;
    for (int j = 0; j < 2; ++j) sys.m[j] = kSpeedOfLight * (toas[0] - toas[j + 1]);

    // Coarse seed: scan the extent (inclusive of both edges).
    Vec2 best{0.0, 0.0};
    double best_obj = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(prm.extent / prm.grid_pitch) + 1;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 g = {ix * prm.grid_pitch, iy * prm.grid_pitch};
            std::array<double, 2> f;
            std::array<double, 3> d;
            sys.resid(g, f, d);
            const double obj = sse(f);
            if (obj < best_obj) {
                best_obj = obj;
                best = g;
            }
        }
    }

    TdoaFix fix;
    fix.feasible = true;
    fix.used_bs = {0, 1, 2};
    fix.degenerate = near_collinear(bs, prm.extent);
    fix.position = clamp_extent(gauss_newton(sys, best, prm, fix.residual), prm.extent);
    return fix;
}

TdoaFix solve_fix(const std::array<Vec3, 7>& tx,
                  const std::array<ToaMeasurement, 7>& toas, const TdoaParams& prm) {
    TdoaFix fix;
    const std::vector<int> order = select_stations(toas);
    if (order.size() < 3) return fix;  // infeasible

    const int main = order[0];
    // Seed objective over all detected stations.
    Vec2 best{0.0, 0.0};
    double best_obj = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(prm.extent / prm.grid_pitch) + 1;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 g = {ix * prm.grid_pitch, iy * prm.grid_pitch};
            const double dmain = station_dist(tx[static_cast<std::size_t>(main)], g, prm.ue_height);
            double obj = 0.0;
            for (std::size_t oi = 1; oi < order.size(); ++oi) {
                const int j = order[oi];
                const double mm = kSpeedOfLight * (toas[static_cast<std::size_t>(main)].toa -
                                                   toas[static_cast<std::size_t>(j)].toa);
                const double dj = station_dist(tx[static_cast<std::size_t>(j)], g, prm.ue_height);
                const double r = mm - (dmain - dj);
                obj += r * r;
            }
            if (obj < best_obj) {
                best_obj = obj;
                best = g;
            }
        }
    }

    GnSystem sys;
    for (int i = 0; i < 3; ++i) sys.p[static_cast<std::size_t>(i)] = tx[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    sys.ue_height = prm.ue_height;
    for (int j = 0; j < 2; ++j) {
        sys.m[static_cast<std::size_t>(j)] =
            kSpeedOfLight * (toas[static_cast<std::size_t>(order[0])].toa -
                             toas[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])].toa);
    }

    fix.feasible = true;
    fix.used_bs = {order[0], order[1], order[2]};
    fix.degenerate = near_collinear(sys.p, prm.extent);
    fix.position = clamp_extent(gauss_newton(sys, best, prm, fix.residual), prm.extent);
    return fix;
}

}  // namespace mapfix
