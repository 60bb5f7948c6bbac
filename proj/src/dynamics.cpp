#include "scatlab/dynamics.hpp"

#include "scatlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scatlab {
namespace {

// Curve pieces are not convex, so the tracer cannot exclude the piece it just
// left; roots closer than this (relative to a) are treated as the departure point.
constexpr double kCurveDepartureFactor = 1e-10;

// Distance along the ray to the last crossing of the escape sphere, or to the
// point of closest approach if the ray stays outside it.
double escape_distance(const Vec3& p, const Vec3& v, const Vec3& center, double radius) {
    const Vec3 w = p - center;
    const double b = dot(w, v);
    const double c = dot(w, w) - radius * radius;
    const double disc = b * b - c;
    if (disc >= 0.0) return std::max(0.0, -b + std::sqrt(disc));
    return std::max(0.0, -b);
}

} // namespace

TraceLimits TraceLimits::for_scene(const Scene& scene) {
    TraceLimits limits;
    limits.max_reflections = 10000;
    limits.escape_radius = scene.ball_radius;
    limits.max_path_length = 1e4 * scene.ball_radius;
    return limits;
}

std::size_t TrajectoryRecord::reflection_count() const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](const ReflectionEvent& e) { return !e.grazing; }));
}

bool TrajectoryRecord::has_grazing() const {
    return std::any_of(events.begin(), events.end(), [](const ReflectionEvent& e) { return e.grazing; });
}

Vec3 reflect(const Vec3& v, const Vec3& n) {
    return normalized(v - (2.0 * dot(v, n)) * n);
}

TrajectoryRecord trace(const Scene& scene, const PhaseState& start, const TraceLimits& limits) {
    if (limits.max_reflections < 1 || limits.escape_radius < scene.ball_radius)
        throw ContractError("trace limits need max_reflections >= 1 and escape_radius >= ball radius");

    TrajectoryRecord rec;
    rec.initial = start;
    Vec3 p = start.point;
    Vec3 v = start.direction;
    double length = 0.0;
    HitQuery query;
    const double curve_eps = kCurveDepartureFactor * scene.ball_radius;

    for (;;) {
        const auto next = scene_first_hit(scene, p, v, query);
        if (!next) {
            const double s = escape_distance(p, v, scene.ball_center, limits.escape_radius);
            length += s;
            rec.final = {p + s * v, v};
            rec.classification = Classification::Escaped;
            break;
        }
        if (rec.events.size() >= limits.max_reflections || length + next->hit.t > limits.max_path_length) {
            rec.final = {p, v};
            rec.classification = Classification::Cutoff;
            break;
        }
        length += next->hit.t;

        ReflectionEvent ev;
        ev.obstacle = next->obstacle;
        ev.arc = next->arc;
        ev.point = next->hit.point;
        ev.normal = next->hit.normal;
        ev.grazing = next->hit.grazing;
        ev.cumulative_length = length;
        ev.direction_in = v;
        if (!ev.grazing) v = reflect(v, ev.normal);
        ev.direction_out = v;
        rec.events.push_back(ev);

        p = ev.point;
        if (scene.is_body(ev.obstacle)) {
            query.skip_obstacle = ev.obstacle;
            query.curve_t_min = 0.0;
        } else {
            query.skip_obstacle.reset();
            query.curve_t_min = curve_eps;
        }
    }
    rec.total_length = length;
    return rec;
}

std::vector<std::size_t> itinerary(const TrajectoryRecord& record) {
    std::vector<std::size_t> out;
    out.reserve(record.events.size());
    for (const auto& e : record.events)
        if (!e.grazing) out.push_back(e.obstacle);
    return out;
}

double time_reverse_deviation(const Scene& scene, const TrajectoryRecord& record, const TraceLimits& limits) {
    if (!record.escaped()) throw ContractError("time_reverse_deviation needs an escaped trajectory");
    const TrajectoryRecord back = trace(scene, {record.final.point, -record.final.direction}, limits);
    const std::size_t n = record.events.size();
    if (back.events.size() != n)
        throw ReversibilityError("reversed trajectory has " + std::to_string(back.events.size()) +
                                 " events, forward has " + std::to_string(n));
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        worst = std::max(worst, distance(back.events[k].point, record.events[n - 1 - k].point));
    return worst;
}

} // namespace scatlab
