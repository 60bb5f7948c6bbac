#include "scatlab/geometry.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scatlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEndpointTolerance = 1e-9;
constexpr std::size_t kDisjointSamples = 720;
constexpr std::size_t kConvexitySamples = 100;
constexpr double kMinSeparation = 1e-6;
constexpr double kContainmentMargin = 1e-6;

bool is_orthonormal(const Mat3& r) {
    const Mat3 rtr = r.transposed() * r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > 1e-12) return false;
    return true;
}

std::string describe_ray(const Vec3& o, const Vec3& d) {
    std::ostringstream os;
    os.precision(17);
    os << "origin (" << o.x << ", " << o.y << ", " << o.z << ") direction (" << d.x << ", "
       << d.y << ", " << d.z << ")";
    return os.str();
}

// Roots of A t² + 2B t + C = 0 in ascending order; `tangent` marks a double root.
struct QuadraticRoots {
    int count = 0;
    double lo = 0.0;
    double hi = 0.0;
    bool tangent = false;
};

// Roots of |o + t w|² = 1. The ray is first moved to its point of closest
// approach p0 to the unit-frame origin; 1 − |p0|² is then the squared half-chord
// (times |w|²) and is free of the cancellation in b² − ac for distant origins.
QuadraticRoots solve_unit_quadratic(const Vec3& o, const Vec3& w) {
    QuadraticRoots r;
    const double a = dot(w, w);
    const double t0 = -dot(o, w) / a;
    const Vec3 p0 = o + t0 * w;
    const double scaled = 1.0 - dot(p0, p0);
    if (scaled < -kDiscriminantTolerance) return r;
    r.count = 2;
    if (scaled <= kDiscriminantTolerance) {
        r.lo = r.hi = t0;
        r.tangent = true;
        return r;
    }
    const double half = std::sqrt(scaled / a);
    r.lo = t0 - half;
    r.hi = t0 + half;
    return r;
}

// Newton polish on f(t) = |o + t w|² − 1 in the unit frame.
double polish_root(const Vec3& o, const Vec3& w, double t) {
    for (int it = 0; it < 3; ++it) {
        const Vec3 p = o + t * w;
        const double f = dot(p, p) - 1.0;
        const double df = 2.0 * dot(p, w);
        if (std::abs(df) < 1e-300 || f == 0.0) break;
        const double step = f / df;
        // Near a double root Newton is ill-conditioned; keep the closed form.
        if (std::abs(step) > 1e-6 * (1.0 + std::abs(t))) break;
        t -= step;
    }
    return t;
}

double wrap_positive(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

double cross_z(const Vec3& a, const Vec3& b) { return a.x * b.y - a.y * b.x; }

std::vector<Vec3> fibonacci_sphere(std::size_t count) {
    std::vector<Vec3> out;
    out.reserve(count);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(k);
        out.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return out;
}

// Boundary point of `body` from unit-frame parameters: angle (d = 2) or polar/azimuth (d = 3).
Vec3 body_point(const ConvexBody& body, int dimension, double p0, double p1) {
    if (dimension == 2) return body.from_unit({std::cos(p0), std::sin(p0), 0.0});
    return body.from_unit({std::sin(p0) * std::cos(p1), std::sin(p0) * std::sin(p1), std::cos(p0)});
}

std::array<double, 2> body_params(const ConvexBody& body, int dimension, const Vec3& p) {
    const Vec3 u = body.to_unit(p);
    if (dimension == 2) return {std::atan2(u.y, u.x), 0.0};
    return {std::acos(std::clamp(u.z, -1.0, 1.0)), std::atan2(u.y, u.x)};
}

// Sampled minimum distance between two body boundaries plus coordinate-descent refinement.
double boundary_distance(const ConvexBody& a, const ConvexBody& b, int dimension,
                         const std::vector<Vec3>& samples_a, const simd::PointCloud& cloud_b) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 0; i < samples_a.size(); ++i) {
        const simd::ArgMin m = simd::min_distance2(cloud_b, samples_a[i]);
        if (m.value < best) {
            best = m.value;
            best_i = i;
            best_j = m.index;
        }
    }
    const auto pa = body_params(a, dimension, samples_a[best_i]);
    const auto pb = body_params(b, dimension, cloud_b[best_j]);
    std::array<double, 4> params{pa[0], pa[1], pb[0], pb[1]};
    auto dist2 = [&](const std::array<double, 4>& p) {
        return norm2(body_point(a, dimension, p[0], p[1]) - body_point(b, dimension, p[2], p[3]));
    };
    double current = dist2(params);
    double step = kTwoPi / static_cast<double>(kDisjointSamples);
    for (int round = 0; round < 60; ++round) {
        bool improved = false;
        for (std::size_t k = 0; k < 4; ++k) {
            if (dimension == 2 && (k == 1 || k == 3)) continue;
            for (double sign : {1.0, -1.0}) {
                auto trial = params;
                trial[k] += sign * step;
                const double v = dist2(trial);
                if (v < current) {
                    current = v;
                    params = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return std::sqrt(std::min(current, best));
}

} // namespace

// ---------------------------------------------------------------------------
// ConvexBody

ConvexBody::ConvexBody(BodyKind kind, const Vec3& center, const Vec3& semiaxes, const Mat3& rotation)
    : kind_(kind), center_(center), semiaxes_(semiaxes), rotation_(rotation) {}

ConvexBody ConvexBody::ball(const Vec3& center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ContractError("ball radius must be positive");
    return ConvexBody(BodyKind::Ball, center, {radius, radius, radius}, Mat3::identity());
}

ConvexBody ConvexBody::ellipsoid(const Vec3& center, const Vec3& semiaxes, const Mat3& rotation) {
    for (std::size_t i = 0; i < 3; ++i)
        if (!(semiaxes[i] > 0.0) || !std::isfinite(semiaxes[i]))
            throw ContractError("ellipsoid semiaxes must be positive");
    if (!is_orthonormal(rotation))
        throw ContractError("ellipsoid rotation is not orthonormal (RᵀR ≠ I within 1e-12)");
    return ConvexBody(BodyKind::Ellipsoid, center, semiaxes, rotation);
}

Vec3 ConvexBody::to_unit(const Vec3& x) const {
    const Vec3 q = rotation_.transpose_times(x - center_);
    return {q.x / semiaxes_.x, q.y / semiaxes_.y, q.z / semiaxes_.z};
}

Vec3 ConvexBody::direction_to_unit(const Vec3& v) const {
    const Vec3 q = rotation_.transpose_times(v);
    return {q.x / semiaxes_.x, q.y / semiaxes_.y, q.z / semiaxes_.z};
}

Vec3 ConvexBody::from_unit(const Vec3& u) const {
    return center_ + rotation_ * Vec3{u.x * semiaxes_.x, u.y * semiaxes_.y, u.z * semiaxes_.z};
}

BodyValue ConvexBody::evaluate(const Vec3& x) const {
    const Vec3 q = rotation_.transpose_times(x - center_);
    const Vec3 u{q.x / semiaxes_.x, q.y / semiaxes_.y, q.z / semiaxes_.z};
    const Vec3 g{2.0 * u.x / semiaxes_.x, 2.0 * u.y / semiaxes_.y, 2.0 * u.z / semiaxes_.z};
    return {dot(u, u) - 1.0, rotation_ * g};
}

Vec3 ConvexBody::outward_normal(const Vec3& boundary_point) const {
    return normalized(evaluate(boundary_point).gradient);
}

Mat3 ConvexBody::hessian() const {
    Mat3 d;
    d.m = {2.0 / (semiaxes_.x * semiaxes_.x), 0, 0, 0, 2.0 / (semiaxes_.y * semiaxes_.y), 0, 0, 0,
           2.0 / (semiaxes_.z * semiaxes_.z)};
    return rotation_ * d * rotation_.transposed();
}

ConvexBody ConvexBody::transformed(const Mat3& rotation, const Vec3& pivot, const Vec3& shift) const {
    ConvexBody out = *this;
    out.center_ = rotation * (center_ - pivot) + pivot + shift;
    if (kind_ == BodyKind::Ellipsoid) out.rotation_ = rotation * rotation_;
    return out;
}

BodyValue evaluate_body(const ConvexBody& body, const Vec3& x) { return body.evaluate(x); }

// ---------------------------------------------------------------------------
// Curve pieces

Vec3 EllipticArc::point_at(double angle) const {
    return {center.x + semi_x * std::cos(angle), center.y + semi_y * std::sin(angle), 0.0};
}

bool EllipticArc::covers(double angle) const {
    const double lo = std::min(angle_begin, angle_end);
    const double sweep = std::abs(angle_end - angle_begin);
    if (sweep >= kTwoPi) return true;
    const double rel = wrap_positive(angle - lo);
    return rel <= sweep + 1e-12 || rel >= kTwoPi - 1e-12;
}

Vec3 ArcPiece::start() const {
    if (const auto* arc = std::get_if<EllipticArc>(&shape)) return arc->point_at(arc->angle_begin);
    return std::get<Segment>(shape).from;
}

Vec3 ArcPiece::end() const {
    if (const auto* arc = std::get_if<EllipticArc>(&shape)) return arc->point_at(arc->angle_end);
    return std::get<Segment>(shape).to;
}

bool ArcPiece::has_tag(const std::string& tag) const {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

Vec3 ArcPiece::point_at(double s) const {
    if (const auto* arc = std::get_if<EllipticArc>(&shape))
        return arc->point_at(arc->angle_begin + s * (arc->angle_end - arc->angle_begin));
    const auto& seg = std::get<Segment>(shape);
    return seg.from + s * (seg.to - seg.from);
}

CurveObstacle::CurveObstacle(std::vector<ArcPiece> arcs) : arcs_(std::move(arcs)) {
    if (arcs_.empty()) throw ContractError("curve obstacle needs at least one piece");
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        if (const auto* arc = std::get_if<EllipticArc>(&arcs_[i].shape)) {
            if (!(arc->semi_x > 0.0) || !(arc->semi_y > 0.0))
                throw ContractError("elliptic arc semiaxes must be positive");
        } else {
            const auto& seg = std::get<Segment>(arcs_[i].shape);
            if (distance(seg.from, seg.to) <= kEndpointTolerance)
                throw ContractError("degenerate segment in curve obstacle");
        }
        if (i + 1 < arcs_.size() && distance(arcs_[i].end(), arcs_[i + 1].start()) > kEndpointTolerance)
            throw ContractError("curve pieces " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                " do not share an endpoint");
    }
}

// ---------------------------------------------------------------------------
// Ray queries

std::optional<Hit> ray_intersect(const ConvexBody& body, const Vec3& origin, const Vec3& direction,
                                 double t_min) {
    const Vec3 o = body.to_unit(origin);
    const Vec3 w = body.direction_to_unit(direction);
    const QuadraticRoots roots = solve_unit_quadratic(o, w);
    if (roots.count == 0) return std::nullopt;

    double t;
    if (roots.lo > t_min) {
        t = roots.lo;
    } else if (roots.hi > t_min) {
        t = roots.hi;
    } else {
        return std::nullopt;
    }
    if (!roots.tangent) t = polish_root(o, w, t);

    Hit hit;
    hit.t = t;
    hit.point = origin + t * direction;
    const BodyValue v = body.evaluate(hit.point);
    if (!(std::abs(v.value) < kRootTolerance))
        throw GeometryError("ray_intersect: root residual " + std::to_string(v.value) +
                            " exceeds tolerance for " + describe_ray(origin, direction));
    hit.normal = normalized(v.gradient);
    hit.cos_incidence = dot(direction, hit.normal);
    hit.grazing = roots.tangent || std::abs(hit.cos_incidence) < kTangencyTolerance;
    return hit;
}

namespace {

std::optional<Hit> intersect_arc(const EllipticArc& arc, const Vec3& origin, const Vec3& direction,
                                 double t_min) {
    const Vec3 o{(origin.x - arc.center.x) / arc.semi_x, (origin.y - arc.center.y) / arc.semi_y, 0.0};
    const Vec3 w{direction.x / arc.semi_x, direction.y / arc.semi_y, 0.0};
    const QuadraticRoots roots = solve_unit_quadratic(o, w);
    if (roots.count == 0) return std::nullopt;
    for (double t : {roots.lo, roots.hi}) {
        if (!(t > t_min)) continue;
        if (!roots.tangent) t = polish_root(o, w, t);
        const Vec3 u = o + t * w;
        if (!arc.covers(std::atan2(u.y, u.x))) continue;
        Hit hit;
        hit.t = t;
        hit.point = origin + t * direction;
        const double residual = dot(u, u) - 1.0;
        if (!(std::abs(residual) < kRootTolerance))
            throw GeometryError("ray_intersect(arc): root residual too large for " +
                                describe_ray(origin, direction));
        Vec3 n = normalized(Vec3{u.x / arc.semi_x, u.y / arc.semi_y, 0.0});
        if (dot(n, direction) > 0.0) n = -n;
        hit.normal = n;
        hit.cos_incidence = dot(direction, n);
        hit.grazing = roots.tangent || std::abs(hit.cos_incidence) < kTangencyTolerance;
        return hit;
    }
    return std::nullopt;
}

std::optional<Hit> intersect_segment(const Segment& seg, const Vec3& origin, const Vec3& direction,
                                     double t_min) {
    const Vec3 e = seg.to - seg.from;
    const double len = norm(e);
    const double denom = cross_z(direction, e);
    if (std::abs(denom) <= 1e-15 * len) return std::nullopt;
    const Vec3 w = seg.from - origin;
    const double t = cross_z(w, e) / denom;
    const double s = cross_z(w, direction) / denom;
    if (!(t > t_min) || s < 0.0 || s > 1.0) return std::nullopt;
    Hit hit;
    hit.t = t;
    hit.point = origin + t * direction;
    Vec3 n = perp2(e) * (1.0 / len);
    if (dot(n, direction) > 0.0) n = -n;
    hit.normal = n;
    hit.cos_incidence = dot(direction, n);
    hit.grazing = std::abs(hit.cos_incidence) < kTangencyTolerance;
    return hit;
}

} // namespace

std::optional<Hit> ray_intersect(const ArcPiece& piece, const Vec3& origin, const Vec3& direction,
                                 double t_min) {
    if (const auto* arc = std::get_if<EllipticArc>(&piece.shape))
        return intersect_arc(*arc, origin, direction, t_min);
    return intersect_segment(std::get<Segment>(piece.shape), origin, direction, t_min);
}

std::optional<SceneHit> scene_first_hit(const Scene& scene, const Vec3& origin, const Vec3& direction,
                                        const HitQuery& query) {
    std::optional<SceneHit> best;
    for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        if (query.skip_obstacle && *query.skip_obstacle == i) continue;
        if (auto h = ray_intersect(scene.bodies[i], origin, direction, 0.0)) {
            if (!best || h->t < best->hit.t) best = SceneHit{i, -1, *h};
        }
    }
    for (std::size_t c = 0; c < scene.curves.size(); ++c) {
        const auto& arcs = scene.curves[c].arcs();
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            if (auto h = ray_intersect(arcs[k], origin, direction, query.curve_t_min)) {
                if (!best || h->t < best->hit.t)
                    best = SceneHit{scene.bodies.size() + c, static_cast<int>(k), *h};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Vec3> sphere_directions(int dimension, std::size_t count) {
    if (dimension == 3) return fibonacci_sphere(count);
    std::vector<Vec3> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
        out.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return out;
}

std::vector<Vec3> sample_boundary(const ConvexBody& body, int dimension, std::size_t count) {
    std::vector<Vec3> out = sphere_directions(dimension, count);
    for (Vec3& p : out) p = body.from_unit(p);
    return out;
}

std::vector<Vec3> sample_piece(const ArcPiece& piece, std::size_t count) {
    std::vector<Vec3> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double s = count == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(count - 1);
        out.push_back(piece.point_at(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_scene(const Scene& scene) {
    ValidationReport report;
    const int d = scene.dimension;
    if (d != 2 && d != 3) {
        report.violations.push_back({ViolationKind::BadDimension, {}, "dimension must be 2 or 3"});
        return report;
    }
    if (!(scene.ball_radius > 0.0) || !std::isfinite(scene.ball_radius)) {
        report.violations.push_back({ViolationKind::BadBall, {}, "ball radius must be positive"});
        return report;
    }
    const double a = scene.ball_radius;

    if (d == 2) {
        if (scene.ball_center.z != 0.0)
            report.violations.push_back({ViolationKind::BadDimension, {}, "planar ball center has z != 0"});
        for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
            const auto& b = scene.bodies[i];
            const Mat3& r = b.rotation();
            if (b.center().z != 0.0 || r(2, 2) != 1.0 || r(0, 2) != 0.0 || r(1, 2) != 0.0 ||
                r(2, 0) != 0.0 || r(2, 1) != 0.0)
                report.violations.push_back(
                    {ViolationKind::BadDimension, {i}, "body " + std::to_string(i) + " leaves the plane"});
        }
    } else if (!scene.curves.empty()) {
        report.violations.push_back(
            {ViolationKind::BadDimension, {}, "curve obstacles are only valid in dimension 2"});
    }

    std::vector<std::vector<Vec3>> samples;
    std::vector<simd::PointCloud> clouds;
    samples.reserve(scene.bodies.size());
    for (const auto& body : scene.bodies) {
        samples.push_back(sample_boundary(body, d, kDisjointSamples));
        clouds.emplace_back(samples.back());
    }

    for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        const auto& bi = scene.bodies[i];
        double reach = 0.0;
        if (bi.kind() == BodyKind::Ball) {
            reach = distance(bi.center(), scene.ball_center) + bi.semiaxes().x;
        } else {
            for (const Vec3& p : samples[i]) reach = std::max(reach, distance(p, scene.ball_center));
        }
        if (!(reach < a - kContainmentMargin))
            report.violations.push_back({ViolationKind::NotContained, {i},
                                         "body " + std::to_string(i) + " reaches " +
                                             std::to_string(reach) + " from the ball center (a = " +
                                             std::to_string(a) + ")"});

        const Mat3 h = bi.hessian();
        const auto convex_probe = sample_boundary(bi, d, kConvexitySamples);
        for (const Vec3& p : convex_probe) {
            const Vec3 n = bi.outward_normal(p);
            std::vector<Vec3> tangents;
            if (d == 2) {
                tangents.push_back(perp2(n));
            } else {
                const auto frame = orthonormal_complement(n);
                tangents = {frame[0], frame[1], normalized(frame[0] + frame[1])};
            }
            bool ok = true;
            for (const Vec3& t : tangents) ok = ok && dot(t, h * t) > 0.0;
            if (!ok) {
                report.violations.push_back(
                    {ViolationKind::NotConvex, {i}, "body " + std::to_string(i) + " fails the convexity spot-check"});
                break;
            }
        }

        for (std::size_t j = i + 1; j < scene.bodies.size(); ++j) {
            const auto& bj = scene.bodies[j];
            bool overlap = false;
            for (const Vec3& p : samples[i]) overlap = overlap || bj.evaluate(p).value <= 0.0;
            for (const Vec3& p : samples[j]) overlap = overlap || bi.evaluate(p).value <= 0.0;
            if (overlap || bi.evaluate(bj.center()).value <= 0.0 || bj.evaluate(bi.center()).value <= 0.0) {
                report.violations.push_back({ViolationKind::Overlap, {i, j},
                                             "bodies " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " overlap"});
                continue;
            }
            const double gap = boundary_distance(bi, bj, d, samples[i], clouds[j]);
            if (!(gap > kMinSeparation))
                report.violations.push_back({ViolationKind::TooClose, {i, j},
                                             "bodies " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " are closer than 1e-6"});
        }
    }

    for (std::size_t c = 0; c < scene.curves.size(); ++c) {
        const std::size_t id = scene.bodies.size() + c;
        report.notes.push_back("obstacle " + std::to_string(id) +
                               " is a non-convex curve obstacle; rigidity results do not apply");
        double reach = 0.0;
        bool touches_body = false;
        std::size_t touched = 0;
        for (const auto& piece : scene.curves[c].arcs()) {
            for (const Vec3& p : sample_piece(piece, 200)) {
                reach = std::max(reach, distance(p, scene.ball_center));
                for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
                    if (scene.bodies[i].evaluate(p).value <= 0.0) {
                        touches_body = true;
                        touched = i;
                    }
                }
            }
        }
        if (!(reach < a - kContainmentMargin))
            report.violations.push_back({ViolationKind::NotContained, {id},
                                         "curve obstacle " + std::to_string(id) + " leaves the ball"});
        if (touches_body)
            report.violations.push_back({ViolationKind::Overlap, {touched, id},
                                         "curve obstacle " + std::to_string(id) + " overlaps body " +
                                             std::to_string(touched)});
    }
    return report;
}

Scene transformed(const Scene& scene, const Mat3& rotation, const Vec3& shift) {
    if (!scene.curves.empty() && !(rotation == Mat3::identity()))
        throw ContractError("curve obstacles support translations only");
    Scene out = scene;
    for (auto& body : out.bodies) body = body.transformed(rotation, scene.ball_center, shift);
    for (auto& curve : out.curves) {
        std::vector<ArcPiece> arcs = curve.arcs();
        for (auto& piece : arcs) {
            if (auto* arc = std::get_if<EllipticArc>(&piece.shape)) {
                arc->center += shift;
            } else {
                auto& seg = std::get<Segment>(piece.shape);
                seg.from += shift;
                seg.to += shift;
            }
        }
        curve = CurveObstacle(std::move(arcs));
    }
    out.ball_center += shift;
    return out;
}

} // namespace scatlab
