#pragma once
// Billiard trajectories in the exterior of a scene.

#include "scatlab/geometry.hpp"

#include <cstddef>
#include <vector>

namespace scatlab {

struct PhaseState {
    Vec3 point;
    Vec3 direction;
};

/// Finite surrogate for an orbit that never leaves: after max_reflections
/// events or max_path_length of travel the trajectory is declared cut off.
struct TraceLimits {
    std::size_t max_reflections = 10000;
    double escape_radius = 1.0;
    double max_path_length = 1e4;

    /// Defaults: 10⁴ reflections, escape at the ball radius, path cap 10⁴·a.
    static TraceLimits for_scene(const Scene& scene);
};

enum class Classification { Escaped, Cutoff };

struct ReflectionEvent {
    std::size_t obstacle = 0;
    int arc = -1;
    Vec3 point;
    Vec3 normal;
    bool grazing = false;
    /// Path length from the initial point to this event.
    double cumulative_length = 0.0;
    Vec3 direction_in;
    Vec3 direction_out;
};

struct TrajectoryRecord {
    PhaseState initial;
    std::vector<ReflectionEvent> events;
    PhaseState final;
    double total_length = 0.0;
    Classification classification = Classification::Cutoff;

    bool escaped() const { return classification == Classification::Escaped; }
    /// Number of non-grazing events.
    std::size_t reflection_count() const;
    bool has_grazing() const;
};

/// Specular reflection v − 2⟨v, n⟩n, renormalized.
Vec3 reflect(const Vec3& v, const Vec3& n);

/// Follows the billiard flow from `start` until escape or a limit. Grazing
/// contacts are recorded but the ray continues straight.
TrajectoryRecord trace(const Scene& scene, const PhaseState& start, const TraceLimits& limits);

/// Obstacle ids of the non-grazing events, in order.
std::vector<std::size_t> itinerary(const TrajectoryRecord& record);

/// Retraces an escaped trajectory backwards from its final state and returns the
/// largest distance between matching events. Throws ReversibilityError when the
/// event counts differ, ContractError if the record did not escape.
double time_reverse_deviation(const Scene& scene, const TrajectoryRecord& record, const TraceLimits& limits);

} // namespace scatlab
