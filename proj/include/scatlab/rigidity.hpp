#pragma once
// Experiments probing whether the scattering observables determine the obstacle.

#include "scatlab/dynamics.hpp"
#include "scatlab/spectra.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scatlab {

enum class Verdict { Indistinguishable, Distinguishable };

/// Share of mismatched cells at or below which two spectra count as "almost the same".
inline constexpr double kAlmostSameMismatch = 0.01;

struct DiscrepancyReport {
    /// Hausdorff distance per grid cell; +inf when exactly one side is empty.
    std::vector<double> per_cell;
    double matched_fraction = 1.0;
    /// Largest finite per-cell distance.
    double max_discrepancy = 0.0;
    std::size_t mismatched_cells = 0;
    /// Cells where one table has times and the other none.
    std::size_t sentinel_cells = 0;
    double tol = 0.0;
    Verdict verdict = Verdict::Indistinguishable;
};

/// Hausdorff distance of two finite sets of reals (0 for two empty sets, +inf for one).
double hausdorff_1d(std::span<const double> a, std::span<const double> b);

/// Throws ContractError when the grids differ.
DiscrepancyReport compare_spectra(const SpectrumTable& a, const SpectrumTable& b, double tol);

struct ProbeReport {
    std::vector<std::pair<std::size_t, std::size_t>> counts;
    std::size_t equal = 0;
    double equal_fraction = 1.0;
};

/// Reflection counts (grazing contacts excluded) of matching probes in two scenes.
ProbeReport reflection_count_probe(const Scene& a, const Scene& b, std::span<const PhaseState> probes_a,
                                   std::span<const PhaseState> probes_b, const TraceLimits& limits);
ProbeReport reflection_count_probe(const Scene& a, const Scene& b, std::span<const PhaseState> probes,
                                   const TraceLimits& limits);

/// Uniform points on S0 with directions uniform over the inward hemisphere.
std::vector<PhaseState> random_sphere_probes(const Scene& scene, std::size_t count, std::uint64_t seed);

struct PieceCoverage {
    std::size_t obstacle = 0;
    int arc = -1;
    std::vector<std::string> tags;
    std::size_t samples = 0;
    std::size_t covered = 0;
    double coverage = 0.0;
    /// Boundary samples with no marked reflection point within ε.
    std::vector<Vec3> unreached;
};

struct CoverageReport {
    std::vector<PieceCoverage> pieces;
    std::size_t rays = 0;
    std::size_t escaped = 0;
    std::size_t marks = 0;
};

/// Marks the non-grazing reflection points of escaped random S0 probes and
/// measures, per body (or curve piece), the share of a uniform boundary sample
/// lying within ε of a mark.
CoverageReport accessible_coverage(const Scene& scene, std::size_t rays, double eps, const TraceLimits& limits,
                                   std::uint64_t seed);

struct EstimatePoint {
    Vec3 point;
    std::size_t cell = 0;
    Vec3 x;
    Vec3 y;
    double t = 0.0;
    Vec3 dir_out;
};

struct BoundaryEstimate {
    std::vector<EstimatePoint> points;
    /// One-reflection samples with no admissible root τ ∈ (0, t).
    std::size_t skipped = 0;
    /// Samples dropped by the |x − p| + |p − y| = t consistency filter.
    std::size_t filtered = 0;
};

/// Recovers one reflection point per one-reflection travelling-time sample:
/// p = y − τ·dir_out with |x − p| = t − τ.
BoundaryEstimate reconstruct_boundary(const SpectrumTable& table, const Vec3& ball_center, double ball_radius);

/// Boundary samples of the convex bodies reachable by at least one
/// one-reflection scattering ray, found by direct visibility tests.
std::vector<Vec3> one_reflection_accessible_boundary(const Scene& scene, std::size_t samples_per_body,
                                                     std::size_t directions);

struct PointSetDistance {
    double forward = 0.0;  // sup over a of the distance to b
    double backward = 0.0; // sup over b of the distance to a
    double hausdorff = 0.0;
};

PointSetDistance hausdorff_points(std::span<const Vec3> a, std::span<const Vec3> b);

} // namespace scatlab
