// AVX2 (4 x double) variants of the point-set kernels.
// Compiled with -mavx2 only; no FMA so every lane rounds exactly like the scalar loop.

#include "scatlab/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace scatlab::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

// Folds per-lane minima into one result; equal values keep the lower index.
ArgMin reduce(__m256d best, __m256d best_idx) {
    alignas(32) double vals[kLanes];
    alignas(32) double idxs[kLanes];
    _mm256_store_pd(vals, best);
    _mm256_store_pd(idxs, best_idx);
    ArgMin out;
    for (std::size_t l = 0; l < kLanes; ++l) {
        const auto idx = static_cast<std::size_t>(idxs[l]);
        if (vals[l] < out.value || (vals[l] == out.value && idx < out.index)) {
            out.value = vals[l];
            out.index = idx;
        }
    }
    return out;
}

void merge_tail(ArgMin& acc, double value, std::size_t index) {
    if (value < acc.value) {
        acc.value = value;
        acc.index = index;
    }
}

} // namespace

ArgMin min_distance2(const PointCloud& cloud, const Vec3& q) {
    const double* xs = cloud.xs().data();
    const double* ys = cloud.ys().data();
    const double* zs = cloud.zs().data();
    const std::size_t n = cloud.size();

    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);
    const __m256d step = _mm256_set1_pd(static_cast<double>(kLanes));
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
        const __m256d d2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
        const __m256d lt = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, d2, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        idx = _mm256_add_pd(idx, step);
    }
    ArgMin out = reduce(best, best_idx);
    for (; i < n; ++i) {
        const double dx = xs[i] - q.x;
        const double dy = ys[i] - q.y;
        const double dz = zs[i] - q.z;
        merge_tail(out, (dx * dx + dy * dy) + dz * dz, i);
    }
    return out;
}

ArgMin min_path_via(const PointCloud& cloud, const Vec3& a, const Vec3& b) {
    const double* xs = cloud.xs().data();
    const double* ys = cloud.ys().data();
    const double* zs = cloud.zs().data();
    const std::size_t n = cloud.size();

    const __m256d ax = _mm256_set1_pd(a.x);
    const __m256d ay = _mm256_set1_pd(a.y);
    const __m256d az = _mm256_set1_pd(a.z);
    const __m256d bx = _mm256_set1_pd(b.x);
    const __m256d by = _mm256_set1_pd(b.y);
    const __m256d bz = _mm256_set1_pd(b.z);
    const __m256d step = _mm256_set1_pd(static_cast<double>(kLanes));
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d px = _mm256_loadu_pd(xs + i);
        const __m256d py = _mm256_loadu_pd(ys + i);
        const __m256d pz = _mm256_loadu_pd(zs + i);
        const __m256d dax = _mm256_sub_pd(px, ax);
        const __m256d day = _mm256_sub_pd(py, ay);
        const __m256d daz = _mm256_sub_pd(pz, az);
        const __m256d dbx = _mm256_sub_pd(px, bx);
        const __m256d dby = _mm256_sub_pd(py, by);
        const __m256d dbz = _mm256_sub_pd(pz, bz);
        const __m256d la = _mm256_sqrt_pd(_mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dax, dax), _mm256_mul_pd(day, day)), _mm256_mul_pd(daz, daz)));
        const __m256d lb = _mm256_sqrt_pd(_mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dbx, dbx), _mm256_mul_pd(dby, dby)), _mm256_mul_pd(dbz, dbz)));
        const __m256d len = _mm256_add_pd(la, lb);
        const __m256d lt = _mm256_cmp_pd(len, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, len, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        idx = _mm256_add_pd(idx, step);
    }
    ArgMin out = reduce(best, best_idx);
    for (; i < n; ++i) {
        const double dax = xs[i] - a.x;
        const double day = ys[i] - a.y;
        const double daz = zs[i] - a.z;
        const double dbx = xs[i] - b.x;
        const double dby = ys[i] - b.y;
        const double dbz = zs[i] - b.z;
        const double len = std::sqrt((dax * dax + day * day) + daz * daz) +
                           std::sqrt((dbx * dbx + dby * dby) + dbz * dbz);
        merge_tail(out, len, i);
    }
    return out;
}

} // namespace scatlab::simd::avx2
