#pragma once
// Path enumeration between Tx and Rx: direct rays plus first-order specular
// reflections off vertical building facades via the image method.

#include <vector>

#include "mapfix/geometry.hpp"
#include "mapfix/scene.hpp"

namespace mapfix {

enum class PathKind { Direct, Reflected };

struct PropagationPath {
    PathKind kind = PathKind::Direct;
    // Tx, [reflection point], Rx.
    std::vector<Vec3> vertices;
    double length = 0.0;
    double gain = 0.0;  // linear amplitude
};

// True iff the open segment (a, b) intersects no building box.
bool line_of_sight(const Scene& scene, const Vec3& a, const Vec3& b);

// SinglePath: the direct ray if unobstructed, else nothing.
// MultiPath: direct ray plus every valid image-method facade reflection
// (reflection point on the facade rectangle, both legs unobstructed; the
// reflecting facade does not block its own reflection point).
std::vector<PropagationPath> enumerate_paths(const Scene& scene, int tx, int rx);

// Free-space amplitude lambda / (4*pi*length); reflected paths carry a
// perfect reflection coefficient (gamma = 1).
double path_gain(double length, double frequency_hz, PathKind kind);

// Length of the shortest available path, or +inf when the pair is
// unreachable. This is all the link module needs and skips materializing
// path lists in the per-scene hot loop.
double shortest_path_length(const Scene& scene, int tx, int rx);

// Debug dump: one line per path, "tx,rx,kind,length_m,gain".
std::string dump_paths(const Scene& scene);

}  // namespace mapfix
