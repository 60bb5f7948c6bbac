#pragma once
// Scattering observables: sojourn times and scattering length spectrum scans,
// and travelling times between points of the reference sphere S0 = ∂O.

#include "scatlab/dynamics.hpp"
#include "scatlab/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace scatlab {

struct SlsSample {
    std::size_t cell = 0;
    Vec3 omega;
    /// Coordinates of the launch point in the hyperplane Z_ω (d − 1 used).
    std::array<double, 2> impact{};
    Vec3 theta;
    double sojourn = 0.0;
    std::size_t reflections = 0;
    bool grazing = false;
    std::vector<std::size_t> itinerary;
};

struct TravelSample {
    std::size_t cell = 0;
    Vec3 x;
    Vec3 y;
    double t = 0.0;
    std::size_t reflections = 0;
    /// Inward direction at x and outward direction at y.
    Vec3 dir_in;
    Vec3 dir_out;
    /// Distance between the refined exit point and y.
    double residual = 0.0;
    std::vector<std::size_t> itinerary;
};

enum class SpectrumKind { Sls, Travel };

/// Everything needed to regenerate the sampling grid of a table.
struct GridSpec {
    SpectrumKind kind = SpectrumKind::Sls;
    int dimension = 2;
    Vec3 ball_center;
    double ball_radius = 1.0;
    /// SLS only: incoming direction.
    Vec3 omega;
    /// SLS: lattice points per axis of Z_ω. Travel: number of points on S0.
    std::size_t resolution = 0;
    /// Travel only: ordered pairs closer than this angle are skipped.
    double min_separation_deg = 1.0;
    /// Travel only: shooting seeds per source point.
    std::size_t seeds = 0;
    double tol = 0.0;
    double dedup = 0.0;
    std::size_t max_reflections = 0;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SpectrumDiagnostics {
    /// Trajectories classified as cut off (trapped for this experiment).
    std::size_t cutoff = 0;
    /// Shooting clusters whose refinement did not converge.
    std::size_t dropped_clusters = 0;
    /// Samples containing at least one grazing contact.
    std::size_t grazing = 0;
};

struct SpectrumTable {
    std::uint64_t scene_digest = 0;
    GridSpec grid;
    std::vector<SlsSample> sls;
    std::vector<TravelSample> travel;
    SpectrumDiagnostics diagnostics;

    std::size_t cell_count() const;
    /// Time set (sojourn or travelling times) of every grid cell.
    std::vector<std::vector<double>> times_by_cell() const;
};

/// One point of the impact-parameter lattice on Z_ω.
struct LatticePoint {
    std::size_t cell = 0;
    std::array<double, 2> impact{};
    Vec3 launch;
};

/// Cell-centred lattice covering the disk of radius a in Z_ω.
std::vector<LatticePoint> sls_lattice(const GridSpec& grid);
/// Points of the travel grid on S0.
std::vector<Vec3> travel_points(const GridSpec& grid);
/// Ordered point-index pairs of the travel grid, one per cell.
std::vector<std::array<std::size_t, 2>> travel_pairs(const GridSpec& grid);

/// T_γ = T'_γ − 2a, where T'_γ is the length of the trajectory between its
/// crossing of Z_ω (the tangent hyperplane of O orthogonal to ω, behind O) on the
/// first leg and its crossing of Z_{−θ} on the last leg. This is independent of
/// the ball radius. Throws ContractError if the record did not escape or its end
/// directions differ from (ω, θ) by more than 1e-9.
double sojourn_time(const Scene& scene, const TrajectoryRecord& record, const Vec3& omega, const Vec3& theta);

/// One trajectory per lattice point of Z_ω; escaped trajectories become samples.
SpectrumTable scan_sls(const Scene& scene, const Vec3& omega, std::size_t resolution, const TraceLimits& limits);

struct ShootingParams {
    std::size_t seeds = 720;
    double tol = 1e-6;
    double dedup = 1e-4;
    TraceLimits limits;

    /// 720 seeds in d = 2, 2000 in d = 3; tol = 1e-7·a; dedup = 1e-5·a.
    static ShootingParams defaults(const Scene& scene);
};

struct GeodesicSearch {
    std::vector<TravelSample> samples;
    std::size_t dropped_clusters = 0;
    std::size_t cutoff_seeds = 0;
};

/// Shooting method for the (x, y)-geodesics. x and y must lie on S0 and differ.
GeodesicSearch find_xy_geodesics(const Scene& scene, const Vec3& x, const Vec3& y, const ShootingParams& params);

SpectrumTable travelling_time_spectrum(const Scene& scene, std::size_t points, double min_separation_deg,
                                       const ShootingParams& params);

} // namespace scatlab
