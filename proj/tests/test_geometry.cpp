#include <doctest.h>

#include "scatlab/errors.hpp"
#include "scatlab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace scatlab;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Scene two_disks(double sep = 3.0) {
    Scene s;
    s.dimension = 2;
    s.ball_radius = 10.0;
    s.bodies = {ConvexBody::ball({-sep, 0, 0}, 1.0), ConvexBody::ball({sep, 0, 0}, 1.0)};
    return s;
}

bool has_kind(const ValidationReport& r, ViolationKind k) {
    for (const auto& v : r.violations)
        if (v.kind == k) return true;
    return false;
}

} // namespace

TEST_CASE("evaluate_body matches hand-evaluated implicit functions") {
    const auto disk = ConvexBody::ball({0, 0, 0}, 1.0);
    auto v = evaluate_body(disk, {0, 0, 0});
    CHECK(v.value == doctest::Approx(-1.0));
    CHECK(norm(v.gradient) == doctest::Approx(0.0));

    v = evaluate_body(disk, {1, 0, 0});
    CHECK(v.value == doctest::Approx(0.0));
    CHECK(v.gradient.x == doctest::Approx(2.0));
    CHECK(v.gradient.y == doctest::Approx(0.0));

    // φ = x²/4 + y² − 1, ∇φ = (x/2, 2y)
    const auto ell = ConvexBody::ellipsoid({0, 0, 0}, {2, 1, 1});
    v = evaluate_body(ell, {2, 0, 0});
    CHECK(v.value == doctest::Approx(0.0));
    CHECK(v.gradient.x == doctest::Approx(1.0));
    CHECK(v.gradient.y == doctest::Approx(0.0));

    v = evaluate_body(ell, {1, 0.5, 0});
    CHECK(v.value == doctest::Approx(0.25 + 0.25 - 1.0));
    CHECK(v.gradient.x == doctest::Approx(0.5));
    CHECK(v.gradient.y == doctest::Approx(1.0));
}

TEST_CASE("rotated ellipse agrees with the explicitly rotated quadratic form") {
    const double th = 0.7;
    const auto ell = ConvexBody::ellipsoid({1, -2, 0}, {3, 0.5, 1}, rotation_z(th));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 x{uniform(rng, -5, 5), uniform(rng, -5, 5), 0};
        const double dx = x.x - 1, dy = x.y + 2;
        const double u = std::cos(th) * dx + std::sin(th) * dy;
        const double w = -std::sin(th) * dx + std::cos(th) * dy;
        CHECK(evaluate_body(ell, x).value == doctest::Approx(u * u / 9 + w * w / 0.25 - 1).epsilon(1e-12));
    }
}

TEST_CASE("body factories reject invalid parameters") {
    CHECK_THROWS_AS(ConvexBody::ball({0, 0, 0}, 0.0), ContractError);
    CHECK_THROWS_AS(ConvexBody::ellipsoid({0, 0, 0}, {1, -1, 1}), ContractError);
    Mat3 bad = Mat3::identity();
    bad(0, 1) = 1e-6;
    CHECK_THROWS_AS(ConvexBody::ellipsoid({0, 0, 0}, {1, 2, 1}, bad), ContractError);
}

TEST_CASE("ray_intersect on the unit disk") {
    const auto disk = ConvexBody::ball({0, 0, 0}, 1.0);

    auto h = ray_intersect(disk, {-2, 0, 0}, {1, 0, 0}, 0.0);
    REQUIRE(h);
    CHECK(h->t == doctest::Approx(1.0));
    CHECK(h->point.x == doctest::Approx(-1.0));
    CHECK(h->normal.x == doctest::Approx(-1.0));
    CHECK(h->cos_incidence == doctest::Approx(-1.0));
    CHECK_FALSE(h->grazing);

    h = ray_intersect(disk, {-2, 1, 0}, {1, 0, 0}, 0.0);
    REQUIRE(h);
    CHECK(h->point.x == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(h->point.y == doctest::Approx(1.0));
    CHECK(h->grazing);

    CHECK_FALSE(ray_intersect(disk, {-2, 2, 0}, {1, 0, 0}, 0.0));
    // Pointing away.
    CHECK_FALSE(ray_intersect(disk, {-2, 0, 0}, {-1, 0, 0}, 0.0));
}

TEST_CASE("ray roots are certified and first along the ray") {
    std::mt19937_64 rng(20240611);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const int d = i % 2 == 0 ? 2 : 3;
        const Vec3 c{uniform(rng, -1, 1), uniform(rng, -1, 1), d == 3 ? uniform(rng, -1, 1) : 0.0};
        const Vec3 semi{uniform(rng, 0.2, 2), uniform(rng, 0.2, 2), d == 3 ? uniform(rng, 0.2, 2) : 1.0};
        const Vec3 axis = d == 3 ? normalized(Vec3{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)})
                                 : Vec3{0, 0, 1};
        const auto body = ConvexBody::ellipsoid(c, semi, rotation_axis(axis, uniform(rng, 0, 6.28)));
        Vec3 origin{uniform(rng, -6, 6), uniform(rng, -6, 6), d == 3 ? uniform(rng, -6, 6) : 0.0};
        if (evaluate_body(body, origin).value <= 0.0) continue;
        Vec3 target = c + Vec3{uniform(rng, -2, 2), uniform(rng, -2, 2), d == 3 ? uniform(rng, -2, 2) : 0.0};
        const Vec3 dir = normalized(target - origin);
        const auto h = ray_intersect(body, origin, dir, 0.0);
        if (!h) continue;
        ++hits;
        CHECK(std::abs(evaluate_body(body, h->point).value) < 1e-9);
        CHECK(std::abs(norm(h->normal) - 1.0) < 1e-12);
        // No sign change of φ on (0, t).
        bool outside = true;
        for (int k = 1; k < 200; ++k) outside = outside && evaluate_body(body, origin + (h->t * k / 200.0) * dir).value > 0.0;
        CHECK(outside);
        // Chord property: the exit point lies further on, midpoint strictly inside.
        if (!h->grazing) {
            const auto exit = ray_intersect(body, h->point, dir, 1e-9);
            REQUIRE(exit);
            CHECK(evaluate_body(body, 0.5 * (h->point + exit->point)).value < 0.0);
        }
    }
    CHECK(hits > 3000);
}

TEST_CASE("grazing rays separate misses from two-root hits") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const double r = uniform(rng, 0.3, 2.0);
        const auto disk = ConvexBody::ball({0, 0, 0}, r);
        const double phi = uniform(rng, 0, 2 * std::numbers::pi);
        const Vec3 dir{std::cos(phi), std::sin(phi), 0};
        const Vec3 side = perp2(dir);
        const Vec3 origin = -5.0 * dir + r * side;
        const auto h = ray_intersect(disk, origin, dir, 0.0);
        REQUIRE(h);
        CHECK(h->grazing);
        CHECK_FALSE(ray_intersect(disk, origin + 1e-4 * side, dir, 0.0));
        const auto inner = ray_intersect(disk, origin - 1e-4 * side, dir, 0.0);
        REQUIRE(inner);
        CHECK_FALSE(inner->grazing);
        CHECK(ray_intersect(disk, inner->point, dir, 1e-12));
    }
}

TEST_CASE("ray_intersect on curve pieces") {
    const ArcPiece seg{Segment{{0, -1, 0}, {0, 1, 0}}, {"wall"}};
    auto h = ray_intersect(seg, {-2, 0.5, 0}, {1, 0, 0}, 0.0);
    REQUIRE(h);
    CHECK(h->t == doctest::Approx(2.0));
    CHECK(h->normal.x == doctest::Approx(-1.0));
    CHECK_FALSE(ray_intersect(seg, {-2, 1.5, 0}, {1, 0, 0}, 0.0));
    CHECK(seg.has_tag("wall"));

    // Upper half of the unit circle, hit from inside.
    const ArcPiece arc{EllipticArc{{0, 0, 0}, 1, 1, 0, std::numbers::pi}, {}};
    h = ray_intersect(arc, {0, 0, 0}, {0, 1, 0}, 0.0);
    REQUIRE(h);
    CHECK(h->point.y == doctest::Approx(1.0));
    CHECK(h->normal.y == doctest::Approx(-1.0));
    CHECK_FALSE(ray_intersect(arc, {0, 0, 0}, {0, -1, 0}, 0.0));
}

TEST_CASE("scene_first_hit picks the nearest obstacle") {
    Scene empty;
    empty.ball_radius = 10;
    CHECK_FALSE(scene_first_hit(empty, {0, 0, 0}, {1, 0, 0}));

    const Scene s = two_disks();
    auto h = scene_first_hit(s, {-6, 0, 0}, {1, 0, 0});
    REQUIRE(h);
    CHECK(h->obstacle == 0);
    CHECK(h->hit.point.x == doctest::Approx(-4.0));
    CHECK_FALSE(scene_first_hit(s, {0, 2, 0}, {0, -1, 0}));

    HitQuery q;
    q.skip_obstacle = 0;
    h = scene_first_hit(s, {-6, 0, 0}, {1, 0, 0}, q);
    REQUIRE(h);
    CHECK(h->obstacle == 1);
}

TEST_CASE("validate_scene examples") {
    CHECK(validate_scene(two_disks()).admissible());

    const auto overlap = validate_scene(two_disks(0.5));
    CHECK(has_kind(overlap, ViolationKind::Overlap));

    Scene out = two_disks();
    out.bodies = {ConvexBody::ball({9.5, 0, 0}, 1.0)};
    CHECK(has_kind(validate_scene(out), ViolationKind::NotContained));

    // Disjoint by less than the 1e-6 threshold.
    Scene close = two_disks();
    close.bodies = {ConvexBody::ball({-1.0000001, 0, 0}, 1.0), ConvexBody::ball({1.0000001, 0, 0}, 1.0)};
    CHECK_FALSE(validate_scene(close).admissible());

    // Nearly touching ellipses found by the refinement stage.
    Scene ell = two_disks();
    ell.bodies = {ConvexBody::ellipsoid({-2.05, 0, 0}, {2, 0.5, 1}, rotation_z(0.0)),
                  ConvexBody::ellipsoid({2.05, 0, 0}, {2, 0.5, 1})};
    CHECK(validate_scene(ell).admissible());
    ell.bodies[1] = ConvexBody::ellipsoid({1.9, 0, 0}, {2, 0.5, 1});
    CHECK(has_kind(validate_scene(ell), ViolationKind::Overlap));
}

TEST_CASE("curve obstacles need joined pieces and carry a non-convex note") {
    CHECK_THROWS_AS(CurveObstacle({ArcPiece{Segment{{0, 0, 0}, {1, 0, 0}}, {}},
                                   ArcPiece{Segment{{1.1, 0, 0}, {2, 0, 0}}, {}}}),
                    ContractError);
    Scene s;
    s.ball_radius = 10;
    s.curves.emplace_back(std::vector<ArcPiece>{ArcPiece{Segment{{0, 0, 0}, {1, 0, 0}}, {}},
                                                ArcPiece{Segment{{1, 0, 0}, {1, 1, 0}}, {}}});
    const auto r = validate_scene(s);
    CHECK(r.admissible());
    CHECK_FALSE(r.notes.empty());
    CHECK_FALSE(s.convex_union());
    static_assert(CurveObstacle::non_convex);
}

TEST_CASE("transformed scenes move bodies rigidly about the ball center") {
    const Scene s = two_disks();
    const Scene r = transformed(s, rotation_z(std::numbers::pi / 2));
    CHECK(r.bodies[0].center().x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.bodies[0].center().y == doctest::Approx(-3.0));
    CHECK(validate_scene(r).admissible());
}

TEST_CASE("boundary samples lie on the boundary") {
    const auto ell = ConvexBody::ellipsoid({1, 2, 3}, {1, 2, 3}, rotation_axis(normalized(Vec3{1, 1, 1}), 0.4));
    for (const Vec3& p : sample_boundary(ell, 3, 500)) CHECK(std::abs(evaluate_body(ell, p).value) < 1e-12);
    for (const Vec3& d : sphere_directions(3, 300)) CHECK(norm(d) == doctest::Approx(1.0));
}
