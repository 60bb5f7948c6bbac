#pragma once
// Data-parallel point-set kernels with a scalar reference and an AVX2 variant.
//
// The AVX2 path evaluates the same expression tree in the same order (no FMA
// contraction), so both variants return bit-identical results; ties resolve to
// the lowest index. The dispatcher picks AVX2 when the CPU reports it, unless
// SCATLAB_SIMD=scalar is set or force_isa() overrides the choice.

#include "scatlab/vec.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace scatlab::simd {

/// Structure-of-arrays point storage.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::span<const Vec3> points);

    void push_back(const Vec3& p);
    void reserve(std::size_t n);
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }
    Vec3 operator[](std::size_t i) const { return {x_[i], y_[i], z_[i]}; }

    std::span<const double> xs() const { return x_; }
    std::span<const double> ys() const { return y_; }
    std::span<const double> zs() const { return z_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> z_;
};

struct ArgMin {
    double value = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
};

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool cpu_has_avx2();
Isa active_isa();
/// Overrides the runtime choice; requesting Avx2 on a CPU without it falls back to Scalar.
void force_isa(Isa isa);

/// min_i |p_i − q|²
ArgMin min_distance2(const PointCloud& cloud, const Vec3& q);
/// min_i |a − p_i| + |p_i − b|
ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b);
/// For every query, the nearest squared distance into `cloud`.
std::vector<double> nearest_distance2(const PointCloud& cloud, const PointCloud& queries);

namespace scalar {
ArgMin min_distance2(const PointCloud& cloud, const Vec3& q);
ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b);
} // namespace scalar

#if defined(SCATLAB_HAVE_AVX2)
namespace avx2 {
ArgMin min_distance2(const PointCloud& cloud, const Vec3& q);
ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b);
} // namespace avx2
#endif

} // namespace scatlab::simd
