#pragma once
// Small 2D/3D vector types and the segment vs axis-aligned-box test that the
// ray tracer is built on.

#include <cmath>

namespace mapfix {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec2 xy() const { return {x, y}; }
};

inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Axis-aligned box, used for building volumes (footprint x [0, height]).
struct Aabb {
    Vec3 lo;
    Vec3 hi;
};

// True if the open segment (a, b) passes through the interior of the box.
// The box is shrunk by `eps` on every face so that rays grazing a facade
// (e.g. the two legs of a reflection meeting at their own facade) do not
// count as blocked. Slab method; parameter overlap below 1e-15 is treated
// as a graze, not a hit.
bool segment_intersects_box(const Vec3& a, const Vec3& b, const Aabb& box,
                            double eps = 1e-9);

}  // namespace mapfix
