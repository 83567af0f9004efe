#include "mapfix/geometry.hpp"

#include <algorithm>

namespace mapfix {

bool segment_intersects_box(const Vec3& a, const Vec3& b, const Aabb& box,
                            double eps) {
    const double amin[3] = {box.lo.x + eps, box.lo.y + eps, box.lo.z + eps};
    const double amax[3] = {box.hi.x - eps, box.hi.y - eps, box.hi.z - eps};
    const double pa[3] = {a.x, a.y, a.z};
    const double pb[3] = {b.x, b.y, b.z};

    double tmin = 0.0;
    double tmax = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        const double d = pb[ax] - pa[ax];
        if (std::abs(d) < 1e-30) {
            // Segment parallel to this slab: must already lie inside it.
            if (pa[ax] < amin[ax] || pa[ax] > amax[ax]) return false;
            continue;
        }
        const double t1 = (amin[ax] - pa[ax]) / d;
        const double t2 = (amax[ax] - pa[ax]) / d;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    }
    return tmax - tmin > 1e-15;
}

}  // namespace mapfix
