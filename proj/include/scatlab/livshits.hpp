#pragma once
// Livshits' non-uniqueness example: a cavity whose upper wall is half an
// ellipse with foci A = (−c, 0) and B = (c, 0), entered only through the
// aperture (−c, c) on the focal line. Every ray entering between the foci
// leaves between the foci after one reflection, so the wall tops beside the
// aperture are never touched by a scattering ray and can be reshaped freely.
//
// Layout (a: semi-major, b = √(a² − c²), w: wall thickness, h: floor depth):
//
//        outer half-ellipse (a + w, b + w)
//      ┌──── inner half-ellipse (a, b) ────┐
//      │  ▁▁▁▁hidden▁▁▁▁  A   B  ▁▁▁▁hidden▁▁▁▁  │   y = 0
//      └────────────────┘       └────────────────┘   y = −h
//                         aperture

#include "scatlab/rigidity.hpp"

#include <cstddef>
#include <cstdint>

namespace scatlab {

enum class HiddenVariant {
    Bump, ///< H1: elliptic dent below the focal line
    Flat, ///< H2: straight segment on the focal line
};

inline constexpr const char* kHiddenTag = "hidden";

struct LivshitsParams {
    double semi_major = 2.0;
    double focal = 1.0;
    double wall = 0.5;
    double floor_depth = 0.3;
    double ball_radius = 10.0;
    /// Depth of the H1 dent; must stay below floor_depth.
    double bump_depth = 0.15;
    std::size_t aperture_rays = 100000;
    std::size_t focal_rays = 1000;
    std::size_t sls_directions = 8;
    std::size_t sls_resolution = 256;
    std::size_t travel_points = 12;
    std::size_t travel_seeds = 720;
    std::uint64_t seed = 1;
};

/// Throws ContractError if the aperture does not sit strictly between the foci
/// inside a valid half-ellipse, or the obstacle does not fit in the ball.
Scene livshits_scene(const LivshitsParams& params, HiddenVariant variant);

/// x coordinate where a ray entering the cavity at (entry_x, 0) with the given
/// elevation angle crosses the focal line again after its first reflection.
double focal_return_crossing(const LivshitsParams& params, double entry_x, double elevation);

/// Largest distance from focus B to the reflected line of rays leaving focus A
/// toward uniformly spread points of the inner half-ellipse.
double focal_reflection_error(const LivshitsParams& params, std::size_t rays, std::uint64_t seed);

struct LivshitsReport {
    std::size_t aperture_rays = 0;
    std::size_t hidden_hits_bump = 0;
    std::size_t hidden_hits_flat = 0;
    /// Aperture rays whose first return to the focal line stayed within (−c, c).
    std::size_t returns_between_foci = 0;
    std::size_t returns_checked = 0;
    double focal_error = 0.0;
    std::size_t focal_rays = 0;
    DiscrepancyReport sls;
    DiscrepancyReport travel;
    /// Travelling-time tables of H1 and H2, kept for export.
    SpectrumTable travel_bump;
    SpectrumTable travel_flat;
    std::size_t cutoff_bump = 0;
    std::size_t cutoff_flat = 0;

    bool passed(double max_focal_error = 1e-9) const;
};

/// Aperture rays are launched from S0 through uniformly drawn aperture points
/// with upward directions whose backward line clears the channel floor.
std::vector<PhaseState> aperture_rays(const LivshitsParams& params, std::size_t count, std::uint64_t seed);

LivshitsReport livshits_demo(const LivshitsParams& params);

} // namespace scatlab
