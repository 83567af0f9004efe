#include "mapfix/raytrace.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mapfix/rng.hpp"

namespace mapfix {

namespace {

constexpr double kEps = 1e-9;
constexpr double kC = 299792458.0;

struct Facade {
    int axis;      // 0 = plane of constant x, 1 = plane of constant y
    double plane;  // coordinate of the plane
    double sign;   // outward normal direction along `axis`
    int lat;       // lateral axis (the one the rectangle extends along)
    double lo;     // rectangle extent along `lat`
    double hi;
    double height;
};

void collect_facades(const Building& b, Facade out[4]) {
    out[0] = {0, b.x_min, -1.0, 1, b.y_min, b.y_min + b.depth, b.height};
    out[1] = {0, b.x_min + b.width, 1.0, 1, b.y_min, b.y_min + b.depth, b.height};
    out[2] = {1, b.y_min, -1.0, 0, b.x_min, b.x_min + b.width, b.height};
    out[3] = {1, b.y_min + b.depth, 1.0, 0, b.x_min, b.x_min + b.width, b.height};
}

double coord(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }
void set_coord(Vec3& v, int axis, double val) {
    if (axis == 0) v.x = val;
    else if (axis == 1) v.y = val;
    else v.z = val;
}

// Image-method reflection point of (a -> facade -> b), or nullopt-like flag.
bool reflection_point(const Facade& f, const Vec3& a, const Vec3& b, Vec3& out) {
    // Both endpoints strictly on the outward side of the facade plane.
    if (f.sign * (coord(a, f.axis) - f.plane) <= kEps) return false;
    if (f.sign * (coord(b, f.axis) - f.plane) <= kEps) return false;
    Vec3 img = a;
    set_coord(img, f.axis, 2.0 * f.plane - coord(a, f.axis));
    const double den = coord(b, f.axis) - coord(img, f.axis);
    if (std::abs(den) < 1e-30) return false;
    const double t = (f.plane - coord(img, f.axis)) / den;
    if (!(t > 0.0 && t < 1.0)) return false;
    out = img + (b - img) * t;
    // Half-open rectangle: on-facade laterally, strictly below the top edge.
    if (coord(out, f.lat) < f.lo || coord(out, f.lat) >= f.hi) return false;
    if (out.z < 0.0 || out.z >= f.height) return false;
    return true;
}

}  // namespace

bool line_of_sight(const Scene& scene, const Vec3& a, const Vec3& b) {
    for (const Building& bld : scene.buildings) {
        if (segment_intersects_box(a, b, bld.box(), kEps)) return false;
    }
    return true;
}

double path_gain(double length, double frequency_hz, PathKind /*kind*/) {
    // Gamma = 1 for reflections, so the path kind does not alter the gain.
    const double lambda = kC / frequency_hz;
    return lambda / (4.0 * kPi * length);
}

std::vector<PropagationPath> enumerate_paths(const Scene& scene, int tx, int rx) {
    const Vec3 a = scene.tx[static_cast<std::size_t>(tx)];
    const Vec3 b = scene.rx[static_cast<std::size_t>(rx)];
    const double freq = 4e9;

    std::vector<PropagationPath> paths;
    if (line_of_sight(scene, a, b)) {
        PropagationPath p;
        p.kind = PathKind::Direct;
        p.vertices = {a, b};
        p.length = dist(a, b);
        p.gain = path_gain(p.length, freq, p.kind);
        paths.push_back(std::move(p));
    }
    if (scene.mode == PathMode::SinglePath) return paths;

    Facade facades[4];
    for (const Building& bld : scene.buildings) {
        collect_facades(bld, facades);
        for (const Facade& f : facades) {
            Vec3 rp;
            if (!reflection_point(f, a, b, rp)) continue;
            if (!line_of_sight(scene, a, rp) || !line_of_sight(scene, rp, b)) continue;
            PropagationPath p;
            p.kind = PathKind::Reflected;
            p.vertices = {a, rp, b};
            p.length = dist(a, rp) + dist(rp, b);
            p.gain = path_gain(p.length, freq, p.kind);
            paths.push_back(std::move(p));
        }
    }
    return paths;
}

double shortest_path_length(const Scene& scene, int tx, int rx) {
    const Vec3 a = scene.tx[static_cast<std::size_t>(tx)];
    const Vec3 b = scene.rx[static_cast<std::size_t>(rx)];
    double best = std::numeric_limits<double>::infinity();
    if (line_of_sight(scene, a, b)) best = dist(a, b);
    if (scene.mode == PathMode::SinglePath) return best;

    Facade facades[4];
    for (const Building& bld : scene.buildings) {
        collect_facades(bld, facades);
        for (const Facade& f : facades) {
            Vec3 rp;
            if (!reflection_point(f, a, b, rp)) continue;
            const double len = dist(a, rp) + dist(rp, b);
            if (len >= best) continue;  // cannot improve; skip the LOS checks
            if (!line_of_sight(scene, a, rp) || !line_of_sight(scene, rp, b)) continue;
            best = len;
        }
    }
    return best;
}

std::string dump_paths(const Scene& scene) {
    std::ostringstream os;
    os << "tx,rx,kind,length_m,gain\n";
    for (int t = 0; t < 7; ++t) {
        for (int r = 0; r < 120; ++r) {
            for (const PropagationPath& p : enumerate_paths(scene, t, r)) {
                os << t << ',' << r << ','
                   << (p.kind == PathKind::Direct ? "direct" : "reflected") << ','
                   << p.length << ',' << p.gain << '\n';
            }
        }
    }
    return os.str();
}

}  // namespace mapfix
