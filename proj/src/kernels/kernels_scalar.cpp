#include "scatlab/kernels.hpp"

#include <cmath>

namespace scatlab::simd::scalar {

ArgMin min_distance2(const PointCloud& cloud, const Vec3& q) {
    const auto xs = cloud.xs();
    const auto ys = cloud.ys();
    const auto zs = cloud.zs();
    ArgMin best;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - q.x;
        const double dy = ys[i] - q.y;
        const double dz = zs[i] - q.z;
        const double d2 = (dx * dx + dy * dy) + dz * dz;
        if (d2 < best.value) {
            best.value = d2;
            best.index = i;
        }
    }
    return best;
}

ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b) {
    const auto xs = cloud.xs();
    const auto ys = cloud.ys();
    const auto zs = cloud.zs();
    ArgMin best;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double ax = xs[i] - a.x;
        const double ay = ys[i] - a.y;
        const double az = zs[i] - a.z;
        const double bx = xs[i] - b.x;
        const double by = ys[i] - b.y;
        const double bz = zs[i] - b.z;
        const double la = std::sqrt((ax * ax + ay * ay) + az * az);
        const double lb = std::sqrt((bx * bx + by * by) + bz * bz);
        const double len = la + lb;
        if (len < best.value) {
            best.value = len;
            best.index = i;
        }
    }
    return best;
}

} // namespace scatlab::simd::scalar
