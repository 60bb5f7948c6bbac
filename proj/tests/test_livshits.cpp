#include <doctest.h>

#include "scatlab/errors.hpp"
#include "scatlab/livshits.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace scatlab;

namespace {

// Plain reflection off x²/a² + y²/b² = 1 from the focal line, solved by hand.
double crossing_oracle(double a, double b, double x0, double elevation) {
    const double ux = std::cos(elevation), uy = std::sin(elevation);
    const double qa = ux * ux / (a * a) + uy * uy / (b * b);
    const double qb = 2 * x0 * ux / (a * a);
    const double qc = x0 * x0 / (a * a) - 1;
    const double s = (-qb + std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
    const double px = x0 + s * ux, py = s * uy;
    double nx = px / (a * a), ny = py / (b * b);
    const double nn = std::hypot(nx, ny);
    nx /= nn;
    ny /= nn;
    const double d = ux * nx + uy * ny;
    const double vx = ux - 2 * d * nx, vy = uy - 2 * d * ny;
    return px - py * vx / vy;
}

} // namespace

TEST_CASE("focal return crossing matches the hand-solved reflection") {
    const LivshitsParams p;
    const double b = std::sqrt(p.semi_major * p.semi_major - p.focal * p.focal);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x0 = p.focal * (2 * u(rng) - 1) * 0.999;
        const double el = std::numbers::pi * (0.02 + 0.96 * u(rng));
        const double got = focal_return_crossing(p, x0, el);
        CHECK(got == doctest::Approx(crossing_oracle(p.semi_major, b, x0, el)).epsilon(1e-10));
        CHECK(std::abs(got) < p.focal);
    }
    // Rays through (just inside) one focus come back through the other.
    for (double el : {0.3, 1.0, 1.5707963267948966, 2.5})
        CHECK(std::abs(focal_return_crossing(p, -p.focal * (1 - 1e-12), el) - p.focal) < 1e-9);
    CHECK(focal_reflection_error(p, 1000, 2) < 1e-12);
}

TEST_CASE("both cavity variants are admissible and differ only in hidden pieces") {
    const LivshitsParams p;
    const Scene bump = livshits_scene(p, HiddenVariant::Bump);
    const Scene flat = livshits_scene(p, HiddenVariant::Flat);
    CHECK(validate_scene(bump).admissible());
    CHECK(validate_scene(flat).admissible());
    REQUIRE(bump.curves.size() == flat.curves.size());
    std::size_t hidden = 0;
    for (std::size_t c = 0; c < bump.curves.size(); ++c) {
        const auto& ab = bump.curves[c].arcs();
        const auto& af = flat.curves[c].arcs();
        REQUIRE(ab.size() == af.size());
        for (std::size_t k = 0; k < ab.size(); ++k) {
            if (ab[k].has_tag(kHiddenTag)) {
                ++hidden;
                CHECK(af[k].has_tag(kHiddenTag));
            } else {
                CHECK(ab[k] == af[k]);
            }
        }
    }
    CHECK(hidden >= 2);
    CHECK_FALSE(bump == flat);
}

TEST_CASE("invalid cavity parameters are rejected") {
    LivshitsParams p;
    p.focal = 2.5;
    CHECK_THROWS_AS(livshits_scene(p, HiddenVariant::Flat), ContractError);
    p = {};
    p.bump_depth = p.floor_depth;
    CHECK_THROWS_AS(livshits_scene(p, HiddenVariant::Bump), ContractError);
    p = {};
    p.ball_radius = 2.0;
    CHECK_THROWS_AS(livshits_scene(p, HiddenVariant::Flat), ContractError);
}

TEST_CASE("aperture rays start on S0 and cross the aperture upward") {
    const LivshitsParams p;
    for (const auto& r : aperture_rays(p, 2000, 5)) {
        CHECK(norm(r.point) == doctest::Approx(p.ball_radius));
        REQUIRE(r.direction.y > 0.0);
        const double s = -r.point.y / r.direction.y;
        CHECK(std::abs(r.point.x + s * r.direction.x) < p.focal);
    }
}

TEST_CASE("reduced demo run: hidden pieces untouched, spectra identical") {
    LivshitsParams p;
    p.aperture_rays = 20000;
    p.focal_rays = 200;
    p.sls_directions = 4;
    p.sls_resolution = 128;
    p.travel_points = 8;
    const auto report = livshits_demo(p);
    CHECK(report.hidden_hits_bump == 0);
    CHECK(report.hidden_hits_flat == 0);
    CHECK(report.returns_checked > 0);
    CHECK(report.returns_between_foci == report.returns_checked);
    CHECK(report.sls.matched_fraction == 1.0);
    CHECK(report.travel.matched_fraction == 1.0);
    CHECK(report.sls.verdict == Verdict::Indistinguishable);
    CHECK(report.passed());
}
