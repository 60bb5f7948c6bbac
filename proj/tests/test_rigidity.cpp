#include <doctest.h>

#include "scatlab/errors.hpp"
#include "scatlab/kernels.hpp"
#include "scatlab/rigidity.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace scatlab;

namespace {

Scene three_disks() {
    Scene s;
    s.dimension = 2;
    s.ball_radius = 10.0;
    for (int k = 0; k < 3; ++k) {
        const double ang = std::numbers::pi / 2 + 2 * std::numbers::pi * k / 3;
        s.bodies.push_back(ConvexBody::ball({4 * std::cos(ang), 4 * std::sin(ang), 0}, 1.0));
    }
    return s;
}

SpectrumTable sls_table(std::size_t resolution) {
    SpectrumTable t;
    t.grid.kind = SpectrumKind::Sls;
    t.grid.dimension = 2;
    t.grid.ball_radius = 10.0;
    t.grid.omega = {1, 0, 0};
    t.grid.resolution = resolution;
    return t;
}

void add_time(SpectrumTable& t, std::size_t cell, double time) {
    SlsSample s;
    s.cell = cell;
    s.sojourn = time;
    t.sls.push_back(s);
}

// Exit parameter of the ray p + s·u from inside the sphere |x| = a.
double exit_param(const Vec3& p, const Vec3& u, double a) {
    const double b = dot(p, u);
    return -b + std::sqrt(b * b - (norm2(p) - a * a));
}

} // namespace

TEST_CASE("hausdorff_1d examples") {
    const std::vector<double> a{0.0, 1.0}, b{0.0}, none;
    CHECK(hausdorff_1d(a, b) == 1.0);
    CHECK(hausdorff_1d(b, a) == 1.0);
    CHECK(hausdorff_1d(none, none) == 0.0);
    CHECK(std::isinf(hausdorff_1d(a, none)));
    const std::vector<double> c{0.25, 3.0}, d{3.5, 0.0};
    CHECK(hausdorff_1d(c, d) == 0.5);
}

TEST_CASE("compare_spectra verdicts and contracts") {
    SpectrumTable a = sls_table(100), b = sls_table(100);
    REQUIRE(a.cell_count() == 100);
    for (std::size_t c = 0; c < 100; ++c) {
        add_time(a, c, static_cast<double>(c));
        add_time(b, c, static_cast<double>(c) + 1e-9);
    }
    auto r = compare_spectra(a, b, 1e-6);
    CHECK(r.matched_fraction == 1.0);
    CHECK(r.verdict == Verdict::Indistinguishable);
    CHECK(r.max_discrepancy == doctest::Approx(1e-9).epsilon(1e-3));

    // Exactly one mismatched cell out of 100 is already distinguishable.
    b.sls[17].sojourn += 0.5;
    r = compare_spectra(a, b, 1e-6);
    CHECK(r.mismatched_cells == 1);
    CHECK(r.matched_fraction == doctest::Approx(0.99));
    CHECK(r.verdict == Verdict::Distinguishable);
    CHECK(r.max_discrepancy == doctest::Approx(0.5));

    // One-sided cells count as mismatches but do not enter the max.
    b.sls.erase(b.sls.begin() + 17);
    r = compare_spectra(a, b, 1e-6);
    CHECK(r.sentinel_cells == 1);
    CHECK(std::isinf(r.per_cell[17]));
    CHECK(r.max_discrepancy < 1e-8);

    SpectrumTable wide = sls_table(200);
    CHECK_THROWS_AS(compare_spectra(a, wide, 1e-6), ContractError);
    CHECK_THROWS_AS(compare_spectra(a, a, -1.0), ContractError);
}

TEST_CASE("rotated copies have identical reflection counts on rotated probes") {
    const Scene s = three_disks();
    const Mat3 rot = rotation_z(0.7);
    const Scene r = transformed(s, rot);
    const auto probes = random_sphere_probes(s, 2000, 99);
    std::vector<PhaseState> turned;
    for (const auto& p : probes) turned.push_back({rot * p.point, rot * p.direction});
    const auto report = reflection_count_probe(s, r, probes, turned, TraceLimits::for_scene(s));
    CHECK(report.equal == probes.size());
    std::size_t bounced = 0;
    for (const auto& [ca, cb] : report.counts) bounced += ca > 0;
    CHECK(bounced > 100);

    // Identical probes against a rotated scene do notice the change.
    const auto naive = reflection_count_probe(s, r, probes, TraceLimits::for_scene(s));
    CHECK(naive.equal_fraction < 1.0);
}

TEST_CASE("random sphere probes start on S0 and point inward") {
    Scene s = three_disks();
    for (int d : {2, 3}) {
        s.dimension = d;
        for (const auto& p : random_sphere_probes(s, 500, 4)) {
            CHECK(norm(p.point) == doctest::Approx(10.0));
            CHECK(dot(p.direction, p.point) < 0.0);
            CHECK(norm(p.direction) == doctest::Approx(1.0));
            if (d == 2) CHECK(p.point.z == 0.0);
        }
    }
}

TEST_CASE("coverage of a single disk is essentially complete") {
    Scene s;
    s.ball_radius = 10.0;
    s.bodies.push_back(ConvexBody::ball({0, 0, 0}, 1.0));
    const auto report = accessible_coverage(s, 100000, 0.05, TraceLimits::for_scene(s), 3);
    REQUIRE(report.pieces.size() == 1);
    CHECK(report.pieces[0].coverage >= 0.99);
    CHECK(report.escaped == report.rays);
    CHECK_THROWS_AS(accessible_coverage(s, 0, 0.05, TraceLimits::for_scene(s), 3), ContractError);
}

TEST_CASE("reconstruction recovers reflection points of synthetic disk samples") {
    // Samples are built analytically: pick p on the unit disk and an outgoing
    // direction, mirror it, and extend both legs to S0.
    SpectrumTable table;
    table.grid.kind = SpectrumKind::Travel;
    table.grid.dimension = 2;
    table.grid.ball_radius = 10.0;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> truth;
    for (int i = 0; i < 500; ++i) {
        const double phi = 2 * std::numbers::pi * u(rng);
        const Vec3 p{std::cos(phi), std::sin(phi), 0};
        const double beta = 0.95 * std::numbers::pi * (u(rng) - 0.5);
        const Vec3 out = std::cos(beta) * p + std::sin(beta) * perp2(p);
        const Vec3 in = out - 2 * dot(out, p) * p;
        TravelSample t;
        t.x = p - exit_param(p, -in, 10.0) * in;
        t.y = p + exit_param(p, out, 10.0) * out;
        t.t = distance(t.x, p) + distance(p, t.y);
        t.reflections = 1;
        t.dir_in = in;
        t.dir_out = out;
        table.travel.push_back(t);
        truth.push_back(p);
    }
    TravelSample direct;
    direct.x = {-10, 0, 0};
    direct.y = {10, 0, 0};
    direct.t = 20.0;
    table.travel.push_back(direct);

    const auto est = reconstruct_boundary(table, {0, 0, 0}, 10.0);
    REQUIRE(est.points.size() == truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(distance(est.points[i].point, truth[i]) < 1e-8);
        CHECK(std::abs(norm(est.points[i].point) - 1.0) < 1e-8);
    }

    table.grid.kind = SpectrumKind::Sls;
    CHECK_THROWS_AS(reconstruct_boundary(table, {0, 0, 0}, 10.0), ContractError);
}

TEST_CASE("hausdorff_points matches a brute-force evaluation") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Vec3> a, b;
    for (int i = 0; i < 301; ++i) a.push_back({u(rng), u(rng), u(rng)});
    for (int i = 0; i < 157; ++i) b.push_back({u(rng), u(rng), 0.0});
    auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double worst = 0.0;
        for (const Vec3& p : from) {
            double best = INFINITY;
            for (const Vec3& q : to) best = std::min(best, distance(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const auto d = hausdorff_points(a, b);
    CHECK(d.forward == doctest::Approx(directed(a, b)).epsilon(1e-14));
    CHECK(d.backward == doctest::Approx(directed(b, a)).epsilon(1e-14));
    CHECK(d.hausdorff == std::max(d.forward, d.backward));

    const simd::Isa saved = simd::active_isa();
    simd::force_isa(simd::Isa::Scalar);
    const auto s = hausdorff_points(a, b);
    simd::force_isa(saved);
    CHECK(s.hausdorff == d.hausdorff);

    CHECK(hausdorff_points(std::vector<Vec3>{}, std::vector<Vec3>{}).hausdorff == 0.0);
    CHECK(std::isinf(hausdorff_points(a, std::vector<Vec3>{}).hausdorff));
}

namespace {

// Share of boundary samples where the visibility search and traced rays agree.
double accessibility_agreement(const Scene& s, std::size_t samples, std::size_t* listed_count) {
    const auto accessible = one_reflection_accessible_boundary(s, samples, 64);
    *listed_count = accessible.size();
    const simd::PointCloud marks(accessible);
    const TraceLimits limits = TraceLimits::for_scene(s);

    // A sample counts as reachable when some ray traced from S0 reflects there
    // first and then leaves O without further contacts.
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < s.bodies.size(); ++i) {
        for (const Vec3& p : sample_boundary(s.bodies[i], 2, samples)) {
            const Vec3 n = s.bodies[i].outward_normal(p);
            bool traced = false;
            for (int k = 1; k < 256 && !traced; ++k) {
                const double beta = std::numbers::pi * (k / 256.0 - 0.5);
                const Vec3 out = std::cos(beta) * n + std::sin(beta) * perp2(n);
                const Vec3 in = out - 2 * dot(out, n) * n;
                const Vec3 x = p - exit_param(p, -in, s.ball_radius) * in;
                const auto rec = trace(s, {x, in}, limits);
                traced = rec.escaped() && rec.events.size() == 1 && rec.events[0].obstacle == i &&
                         distance(rec.events[0].point, p) < 1e-9;
            }
            const bool listed = !marks.empty() && simd::min_distance2(marks, p).value == 0.0;
            ++total;
            agree += traced == listed;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

} // namespace

TEST_CASE("one-reflection accessible boundary agrees with traced rays") {
    std::size_t listed = 0;
    CHECK(accessibility_agreement(three_disks(), 120, &listed) >= 0.97);
    CHECK(listed == 360);

    // A small disk caged by five larger ones is mostly shadowed.
    Scene cage;
    cage.ball_radius = 10.0;
    cage.bodies.push_back(ConvexBody::ball({0, 0, 0}, 0.5));
    for (int k = 0; k < 5; ++k) {
        const double ang = 2 * std::numbers::pi * k / 5;
        cage.bodies.push_back(ConvexBody::ball({1.7 * std::cos(ang), 1.7 * std::sin(ang), 0}, 0.9));
    }
    REQUIRE(validate_scene(cage).admissible());
    CHECK(accessibility_agreement(cage, 120, &listed) >= 0.97);
    CHECK(listed < 6 * 120);

    Scene one;
    one.ball_radius = 10.0;
    one.bodies.push_back(ConvexBody::ball({0, 0, 0}, 1.0));
    CHECK(one_reflection_accessible_boundary(one, 100, 16).size() == 100);
}
