#pragma once
// Obstacle geometry: strictly convex bodies, planar curve obstacles, scenes,
// and ray intersection queries with tangency classification.

#include "scatlab/vec.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scatlab {

/// |⟨v, n⟩| below this marks a hit as grazing.
inline constexpr double kTangencyTolerance = 1e-8;
/// Normalized discriminants (1 − squared closest-approach distance in the unit
/// frame) inside ±this are treated as a double root.
inline constexpr double kDiscriminantTolerance = 1e-14;
/// Implicit-function residual a returned hit point must satisfy.
inline constexpr double kRootTolerance = 1e-9;

enum class BodyKind { Ball, Ellipsoid };

struct BodyValue {
    double value = 0.0;
    Vec3 gradient;
};

/// One strictly convex component, the sublevel set φ(x) = |D⁻¹Rᵀ(x − c)|² − 1 ≤ 0.
///
/// Planar bodies live in the z = 0 plane with a unit third semiaxis and a
/// rotation about z; the z extent never matters because planar rays keep z = 0.
class ConvexBody {
public:
    static ConvexBody ball(const Vec3& center, double radius);
    /// Throws ContractError if a semiaxis is not positive or RᵀR ≠ I beyond 1e-12.
    static ConvexBody ellipsoid(const Vec3& center, const Vec3& semiaxes,
                                const Mat3& rotation = Mat3::identity());

    BodyKind kind() const { return kind_; }
    const Vec3& center() const { return center_; }
    const Vec3& semiaxes() const { return semiaxes_; }
    const Mat3& rotation() const { return rotation_; }

    /// Maps a world point into the frame where the body is the unit ball.
    Vec3 to_unit(const Vec3& x) const;
    /// Maps a world direction into the unit-ball frame (not normalized).
    Vec3 direction_to_unit(const Vec3& v) const;
    /// Inverse of to_unit.
    Vec3 from_unit(const Vec3& u) const;

    BodyValue evaluate(const Vec3& x) const;
    Vec3 outward_normal(const Vec3& boundary_point) const;

    /// Hessian of φ, constant for this family: 2 R D⁻² Rᵀ.
    Mat3 hessian() const;

    /// Copy moved by a rigid motion x ↦ Q(x − pivot) + pivot + shift.
    ConvexBody transformed(const Mat3& rotation, const Vec3& pivot, const Vec3& shift) const;

    friend bool operator==(const ConvexBody&, const ConvexBody&) = default;

private:
    ConvexBody(BodyKind kind, const Vec3& center, const Vec3& semiaxes, const Mat3& rotation);

    BodyKind kind_ = BodyKind::Ball;
    Vec3 center_;
    Vec3 semiaxes_{1, 1, 1};
    Mat3 rotation_;
};

/// Axis-aligned elliptic arc in the plane, swept from angle_begin to angle_end
/// in the ellipse's parametric angle (either orientation).
struct EllipticArc {
    Vec3 center;
    double semi_x = 1.0;
    double semi_y = 1.0;
    double angle_begin = 0.0;
    double angle_end = 0.0;

    Vec3 point_at(double angle) const;
    bool covers(double angle) const;

    friend bool operator==(const EllipticArc&, const EllipticArc&) = default;
};

struct Segment {
    Vec3 from;
    Vec3 to;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct ArcPiece {
    std::variant<EllipticArc, Segment> shape;
    std::vector<std::string> tags;

    Vec3 start() const;
    Vec3 end() const;
    bool has_tag(const std::string& tag) const;
    /// Point at curve parameter s ∈ [0, 1] (linear in angle for elliptic arcs).
    Vec3 point_at(double s) const;

    friend bool operator==(const ArcPiece&, const ArcPiece&) = default;
};

/// Chain of planar arcs sharing endpoints. Only used for demonstration scenes
/// outside the convex-union class; such scenes carry no rigidity guarantees.
class CurveObstacle {
public:
    /// Throws ContractError unless consecutive pieces meet within 1e-9.
    explicit CurveObstacle(std::vector<ArcPiece> arcs);

    const std::vector<ArcPiece>& arcs() const { return arcs_; }
    static constexpr bool non_convex = true;

    friend bool operator==(const CurveObstacle&, const CurveObstacle&) = default;

private:
    std::vector<ArcPiece> arcs_;
};

struct Scene {
    int dimension = 2;
    std::vector<ConvexBody> bodies;
    std::vector<CurveObstacle> curves;
    Vec3 ball_center;
    double ball_radius = 1.0;
    std::string name;
    std::optional<std::uint64_t> seed;

    /// Obstacle ids: bodies first, then one id per curve obstacle.
    std::size_t obstacle_count() const { return bodies.size() + curves.size(); }
    bool is_body(std::size_t obstacle) const { return obstacle < bodies.size(); }
    /// True when the scene stays within the union-of-convex-bodies class.
    bool convex_union() const { return curves.empty(); }

    friend bool operator==(const Scene&, const Scene&) = default;
};

struct Hit {
    double t = 0.0;
    Vec3 point;
    /// Unit normal. Outward for convex bodies; for curve pieces it faces the incoming ray.
    Vec3 normal;
    double cos_incidence = 0.0;
    bool grazing = false;
};

struct SceneHit {
    std::size_t obstacle = 0;
    /// Piece index within a curve obstacle, -1 for convex bodies.
    int arc = -1;
    Hit hit;
};

/// Extra controls for scene_first_hit used by the tracer.
struct HitQuery {
    /// Convex body to ignore (the one just reflected from or grazed).
    std::optional<std::size_t> skip_obstacle;
    /// Minimum ray parameter accepted on curve pieces.
    double curve_t_min = 0.0;
};

BodyValue evaluate_body(const ConvexBody& body, const Vec3& x);

/// Smallest root t > t_min of φ(origin + t·direction) = 0, if any.
/// Throws GeometryError when the polished root fails the residual check.
std::optional<Hit> ray_intersect(const ConvexBody& body, const Vec3& origin,
                                 const Vec3& direction, double t_min);

std::optional<Hit> ray_intersect(const ArcPiece& piece, const Vec3& origin,
                                 const Vec3& direction, double t_min);

std::optional<SceneHit> scene_first_hit(const Scene& scene, const Vec3& origin,
                                        const Vec3& direction, const HitQuery& query = {});

enum class ViolationKind { Overlap, TooClose, NotContained, NotConvex, BadDimension, BadBall };

struct Violation {
    ViolationKind kind;
    std::vector<std::size_t> obstacles;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    /// Informational remarks, e.g. non-convex curve obstacles present.
    std::vector<std::string> notes;

    bool admissible() const { return violations.empty(); }
};

ValidationReport validate_scene(const Scene& scene);

/// Boundary samples: uniform in angle (d = 2) or a Fibonacci lattice mapped
/// through the body's affine frame (d = 3).
std::vector<Vec3> sample_boundary(const ConvexBody& body, int dimension, std::size_t count);
std::vector<Vec3> sample_piece(const ArcPiece& piece, std::size_t count);

/// Unit vectors on the sphere S^{d-1}: uniform angles for d = 2, Fibonacci lattice for d = 3.
std::vector<Vec3> sphere_directions(int dimension, std::size_t count);

/// Scene moved by x ↦ Q(x − ball_center) + ball_center + shift. The ball moves with the shift.
Scene transformed(const Scene& scene, const Mat3& rotation, const Vec3& shift = {});

} // namespace scatlab
