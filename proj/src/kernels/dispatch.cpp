#include "scatlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace scatlab::simd {

PointCloud::PointCloud(std::span<const Vec3> points) {
    reserve(points.size());
    for (const Vec3& p : points) push_back(p);
}

void PointCloud::push_back(const Vec3& p) {
    x_.push_back(p.x);
    y_.push_back(p.y);
    z_.push_back(p.z);
}

void PointCloud::reserve(std::size_t n) {
    x_.reserve(n);
    y_.reserve(n);
    z_.reserve(n);
}

std::string_view isa_name(Isa isa) {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool cpu_has_avx2() {
#if defined(SCATLAB_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

Isa detect() {
    const char* env = std::getenv("SCATLAB_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
    selected().store(isa, std::memory_order_relaxed);
}

ArgMin min_distance2(const PointCloud& cloud, const Vec3& q) {
#if defined(SCATLAB_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return avx2::min_distance2(cloud, q);
#endif
    return scalar::min_distance2(cloud, q);
}

ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b) {
#if defined(SCATLAB_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return avx2::min_path_via(cloud, a, b);
#endif
    return scalar::min_path_via(cloud, a, b);
}

std::vector<double> nearest_distance2(const PointCloud& cloud, const PointCloud& queries) {
    std::vector<double> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = min_distance2(cloud, queries[i]).value;
    return out;
}

} // namespace scatlab::simd
