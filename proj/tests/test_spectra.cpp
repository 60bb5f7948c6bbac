#include <doctest.h>

#include "scatlab/errors.hpp"
#include "scatlab/kernels.hpp"
#include "scatlab/spectra.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace scatlab;

namespace {

constexpr double kPi = std::numbers::pi;

Scene make_scene(std::vector<ConvexBody> bodies, double a = 10.0) {
    Scene s;
    s.dimension = 2;
    s.ball_radius = a;
    s.bodies = std::move(bodies);
    return s;
}

Vec3 on_circle(double a, double deg) {
    return {a * std::cos(deg * kPi / 180), a * std::sin(deg * kPi / 180), 0};
}

// Brute-force Fermat oracle: min over n boundary points of |x − p| + |p − y|.
double fermat_time(const Vec3& center, double r, const Vec3& x, const Vec3& y, std::size_t n) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2 * kPi * static_cast<double>(i) / static_cast<double>(n);
        const Vec3 p = center + Vec3{r * std::cos(t), r * std::sin(t), 0};
        const double v = distance(x, p) + distance(p, y);
        if (v < best) {
            best = v;
            arg = i;
        }
    }
    // Polish on the winning cell with a golden-section search.
    double lo = 2 * kPi * (static_cast<double>(arg) - 1) / static_cast<double>(n);
    double hi = 2 * kPi * (static_cast<double>(arg) + 1) / static_cast<double>(n);
    auto f = [&](double t) {
        const Vec3 p = center + Vec3{r * std::cos(t), r * std::sin(t), 0};
        return distance(x, p) + distance(p, y);
    };
    for (int k = 0; k < 100; ++k) {
        const double m1 = lo + (hi - lo) * 0.381966;
        const double m2 = hi - (hi - lo) * 0.381966;
        if (f(m1) < f(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return std::min(best, f(0.5 * (lo + hi)));
}

} // namespace

TEST_CASE("sojourn time of a free ray is zero for every offset") {
    const Scene s = make_scene({});
    const TraceLimits limits = TraceLimits::for_scene(s);
    for (double b : {-9.9, -3.0, 0.0, 5.5}) {
        const Vec3 omega = normalized({1, 2, 0});
        const Vec3 start = -10.0 * omega + b * perp2(omega);
        const auto rec = trace(s, {start, omega}, limits);
        CHECK(std::abs(sojourn_time(s, rec, omega, omega)) < 1e-12);
    }
}

TEST_CASE("backscatter sojourn equals minus the diameter") {
    for (double a : {10.0, 20.0, 3.0}) {
        const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)}, a);
        const auto rec = trace(s, {{-a, 0, 0}, {1, 0, 0}}, TraceLimits::for_scene(s));
        CHECK(sojourn_time(s, rec, {1, 0, 0}, {-1, 0, 0}) == doctest::Approx(-2.0).epsilon(1e-12));
    }
}

TEST_CASE("45 degree incidence: sojourn from the explicit leg lengths") {
    // Ray along ω = (1, 0) at height h = √2/2 hits the unit disk at p = (−h, h),
    // reflects to θ = (0, 1). With planes x = −a and y = a the clipped legs are
    // (a − h) and (a − h), so T = 2(a − h) − 2a = −2h = −√2.
    const double h = std::sqrt(2.0) / 2;
    for (double a : {10.0, 17.0}) {
        const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)}, a);
        const auto rec = trace(s, {{-a, h, 0}, {1, 0, 0}}, TraceLimits::for_scene(s));
        REQUIRE(rec.events.size() == 1);
        CHECK(rec.final.direction.y == doctest::Approx(1.0));
        CHECK(sojourn_time(s, rec, {1, 0, 0}, rec.final.direction) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("sojourn_time contract checks") {
    const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    const auto rec = trace(s, {{-10, 0, 0}, {1, 0, 0}}, TraceLimits::for_scene(s));
    CHECK_THROWS_AS(sojourn_time(s, rec, {1, 0, 0}, {1, 0, 0}), ContractError);
    const Scene two = make_scene({ConvexBody::ball({-3, 0, 0}, 1.0), ConvexBody::ball({3, 0, 0}, 1.0)});
    const auto cut = trace(two, {{0, 0, 0}, {1, 0, 0}}, TraceLimits{20, 10, 1e5});
    CHECK_THROWS_AS(sojourn_time(two, cut, {1, 0, 0}, {1, 0, 0}), ContractError);
}

TEST_CASE("scan_sls examples") {
    const Scene empty = make_scene({});
    const auto t0 = scan_sls(empty, {1, 0, 0}, 64, TraceLimits::for_scene(empty));
    CHECK(t0.sls.size() == 64);
    for (const auto& smp : t0.sls) {
        CHECK(std::abs(smp.sojourn) < 1e-12);
        CHECK(smp.reflections == 0);
        CHECK(smp.theta == Vec3{1, 0, 0});
    }

    // Odd resolution puts a lattice point exactly on the axis.
    const Scene disk = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    const auto t1 = scan_sls(disk, {1, 0, 0}, 101, TraceLimits::for_scene(disk));
    const auto& mid = t1.sls[50];
    CHECK(mid.impact[0] == 0.0);
    CHECK(mid.theta.x == doctest::Approx(-1.0));
    CHECK(mid.sojourn == doctest::Approx(-2.0));

    const Scene two = make_scene({ConvexBody::ball({-3, 0, 0}, 1.0), ConvexBody::ball({3, 0, 0}, 1.0)});
    const auto t2 = scan_sls(two, {0, 1, 0}, 101, TraceLimits::for_scene(two));
    // The axis (x = 0) ray passes between the disks; a ray along the axis direction is trapped.
    CHECK(t2.sls.size() == 101);
    const auto t3 = scan_sls(two, {1, 0, 0}, 101, TraceLimits::for_scene(two));
    CHECK(t3.diagnostics.cutoff == 0);
    CHECK(t3.cell_count() == 101);
}

TEST_CASE("sojourn times do not depend on the reference ball") {
    const Scene s10 = make_scene({ConvexBody::ball({1, 0.5, 0}, 1.0), ConvexBody::ball({-2, -3, 0}, 1.5)}, 10.0);
    Scene s20 = s10;
    s20.ball_radius = 20.0;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    int n = 0;
    for (int i = 0; i < 400; ++i) {
        const double phi = 2 * kPi * (u(rng) + 4) / 8;
        const Vec3 omega{std::cos(phi), std::sin(phi), 0};
        const double b = u(rng);
        const auto r10 = trace(s10, {-10.0 * omega + b * perp2(omega), omega}, TraceLimits::for_scene(s10));
        const auto r20 = trace(s20, {-20.0 * omega + b * perp2(omega), omega}, TraceLimits::for_scene(s20));
        if (!r10.escaped() || r10.events.empty()) continue;
        ++n;
        CHECK(std::abs(sojourn_time(s10, r10, omega, r10.final.direction) -
                       sojourn_time(s20, r20, omega, r20.final.direction)) < 1e-9);
    }
    CHECK(n > 50);
}

TEST_CASE("empty scene travel times are chord lengths") {
    const Scene s = make_scene({});
    const auto params = ShootingParams::defaults(s);
    auto r = find_xy_geodesics(s, on_circle(10, 180), on_circle(10, 0), params);
    REQUIRE(r.samples.size() == 1);
    CHECK(r.samples[0].t == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(r.samples[0].reflections == 0);

    r = find_xy_geodesics(s, on_circle(10, 0), on_circle(10, 90), params);
    REQUIRE(r.samples.size() == 1);
    CHECK(std::abs(r.samples[0].t - 10 * std::sqrt(2.0)) < params.tol);

    const auto table = travelling_time_spectrum(s, 16, 1.0, params);
    const auto pts = travel_points(table.grid);
    const auto pairs = travel_pairs(table.grid);
    CHECK(table.travel.size() == pairs.size());
    for (const auto& smp : table.travel)
        CHECK(std::abs(smp.t - distance(pts[pairs[smp.cell][0]], pts[pairs[smp.cell][1]])) < params.tol);
}

TEST_CASE("single disk: one-reflection travel times match the Fermat oracle") {
    const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    const auto params = ShootingParams::defaults(s);
    for (double sep : {20.0, 60.0, 90.0, 135.0, 160.0, 168.0}) {
        const Vec3 x = on_circle(10, 180);
        const Vec3 y = on_circle(10, 180 - sep);
        const auto r = find_xy_geodesics(s, x, y, params);
        std::size_t ones = 0, zeros = 0;
        for (const auto& smp : r.samples) {
            CHECK(smp.t >= distance(x, y) - 1e-9);
            CHECK(smp.residual < params.tol);
            if (smp.reflections == 1) {
                ++ones;
                CHECK(std::abs(smp.t - fermat_time({0, 0, 0}, 1.0, x, y, 100000)) < 1e-6);
            } else if (smp.reflections == 0) {
                ++zeros;
                CHECK(std::abs(smp.t - distance(x, y)) < params.tol);
            }
        }
        CHECK(ones == 1);
        CHECK(zeros == 1);
    }
}

TEST_CASE("single disk: antipodal pair has no geodesic") {
    // The chord is blocked and every reflected ray leaves through the near half of S0.
    const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    const auto r = find_xy_geodesics(s, {-10, 0, 0}, {10, 0, 0}, ShootingParams::defaults(s));
    CHECK(r.samples.empty());
}

TEST_CASE("reflection point on the symmetry axis for a quarter-turn pair") {
    const Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    const auto r = find_xy_geodesics(s, {-10, 0, 0}, {0, 10, 0}, ShootingParams::defaults(s));
    const TravelSample* one = nullptr;
    for (const auto& smp : r.samples)
        if (smp.reflections == 1) one = &smp;
    REQUIRE(one != nullptr);
    const auto rec = trace(s, {one->x, one->dir_in}, TraceLimits::for_scene(s));
    REQUIRE(rec.events.size() == 1);
    const double h = std::sqrt(2.0) / 2;
    CHECK(rec.events[0].point.x == doctest::Approx(-h).epsilon(1e-7));
    CHECK(rec.events[0].point.y == doctest::Approx(h).epsilon(1e-7));
}

TEST_CASE("reciprocity and endpoint directions in a two-disk scene") {
    const Scene s = make_scene({ConvexBody::ball({-3, 0, 0}, 1.0), ConvexBody::ball({3, 0, 0}, 1.2)});
    const auto params = ShootingParams::defaults(s);
    const Vec3 x = on_circle(10, 100);
    const Vec3 y = on_circle(10, 250);
    const auto fwd = find_xy_geodesics(s, x, y, params);
    const auto bwd = find_xy_geodesics(s, y, x, params);
    CHECK(fwd.samples.size() >= 3);
    for (const auto& smp : fwd.samples) {
        bool found = false;
        for (const auto& other : bwd.samples) found = found || std::abs(other.t - smp.t) < params.tol;
        CHECK(found);
        const auto rec = trace(s, {smp.x, smp.dir_in}, params.limits);
        CHECK(distance(rec.final.direction, smp.dir_out) < 1e-9);
        CHECK(itinerary(rec) == smp.itinerary);
    }
}

TEST_CASE("travel spectra are deterministic and thread-count independent") {
    const Scene s = make_scene({ConvexBody::ball({-3, 0, 0}, 1.0), ConvexBody::ball({3, 1, 0}, 1.0)});
    const auto params = ShootingParams::defaults(s);
    const auto a = travelling_time_spectrum(s, 12, 1.0, params);
    const auto b = travelling_time_spectrum(s, 12, 1.0, params);
    REQUIRE(a.travel.size() == b.travel.size());
    for (std::size_t i = 0; i < a.travel.size(); ++i) {
        CHECK(a.travel[i].t == b.travel[i].t);
        CHECK(a.travel[i].cell == b.travel[i].cell);
    }
}

TEST_CASE("spatial shooting finds the direct chord and the one-reflection path") {
    Scene s = make_scene({ConvexBody::ball({0, 0, 0}, 1.0)});
    s.dimension = 3;
    const auto params = ShootingParams::defaults(s);
    const Vec3 x{0, 0, -10};
    const Vec3 y = 10.0 * normalized({1, 0, 1});
    const auto r = find_xy_geodesics(s, x, y, params);
    bool direct = false, one = false;
    for (const auto& smp : r.samples) {
        if (smp.reflections == 0) direct = std::abs(smp.t - distance(x, y)) < params.tol;
        if (smp.reflections == 1) {
            one = true;
            // The reflection point lies in the plane spanned by x, y and the center.
            const auto rec = trace(s, {smp.x, smp.dir_in}, params.limits);
            CHECK(std::abs(rec.events[0].point.y) < 1e-6);
        }
    }
    CHECK(direct);
    CHECK(one);
}

TEST_CASE("find_xy_geodesics contract checks") {
    const Scene s = make_scene({});
    const auto params = ShootingParams::defaults(s);
    CHECK_THROWS_AS(find_xy_geodesics(s, {1, 0, 0}, {10, 0, 0}, params), ContractError);
    CHECK_THROWS_AS(find_xy_geodesics(s, {10, 0, 0}, {10, 0, 0}, params), ContractError);
}
