#include "scatlab/livshits.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace scatlab {
namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) {
    // Midpoint of a 2^-53 bin: never exactly 0 or 1.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double semi_minor(const LivshitsParams& p) {
    return std::sqrt(p.semi_major * p.semi_major - p.focal * p.focal);
}

void check_params(const LivshitsParams& p) {
    if (!(p.focal > 0.0 && p.focal < p.semi_major))
        throw ContractError("Livshits scene needs 0 < focal half-distance < semi-major axis");
    if (!(p.wall > 0.0 && p.floor_depth > 0.0))
        throw ContractError("Livshits scene needs positive wall thickness and floor depth");
    if (!(p.bump_depth > 0.0 && p.bump_depth < p.floor_depth))
        throw ContractError("Livshits bump depth must lie in (0, floor depth)");
    const double outer_x = p.semi_major + p.wall;
    const double reach = std::max({semi_minor(p) + p.wall, std::hypot(outer_x, p.floor_depth)});
    if (!(reach < p.ball_radius - 1e-6)) throw ContractError("Livshits obstacle does not fit inside the ball");
}

EllipticArc inner_arc(const LivshitsParams& p) {
    return EllipticArc{{0, 0, 0}, p.semi_major, semi_minor(p), 0.0, kPi};
}

ArcPiece segment(const Vec3& from, const Vec3& to) {
    return ArcPiece{Segment{from, to}, {}};
}

// Hidden piece on one wall top, running from x0 to x1 (x0 < x1).
ArcPiece hidden_piece(const LivshitsParams& p, double x0, double x1, HiddenVariant variant) {
    ArcPiece piece;
    if (variant == HiddenVariant::Flat) {
        piece.shape = Segment{{x0, 0, 0}, {x1, 0, 0}};
    } else {
        // Lower half of a small ellipse: angle π at x0, 3π/2 at the bottom, 2π at x1.
        piece.shape = EllipticArc{{0.5 * (x0 + x1), 0, 0}, 0.5 * (x1 - x0), p.bump_depth, kPi, 2.0 * kPi};
    }
    piece.tags = {kHiddenTag};
    return piece;
}

DiscrepancyReport merge_reports(const std::vector<DiscrepancyReport>& parts, double tol) {
    DiscrepancyReport r;
    r.tol = tol;
    for (const auto& p : parts) {
        r.per_cell.insert(r.per_cell.end(), p.per_cell.begin(), p.per_cell.end());
        r.mismatched_cells += p.mismatched_cells;
        r.sentinel_cells += p.sentinel_cells;
        r.max_discrepancy = std::max(r.max_discrepancy, p.max_discrepancy);
    }
    const double cells = static_cast<double>(r.per_cell.size());
    const double mismatch = r.per_cell.empty() ? 0.0 : static_cast<double>(r.mismatched_cells) / cells;
    r.matched_fraction = 1.0 - mismatch;
    r.verdict = mismatch >= kAlmostSameMismatch ? Verdict::Distinguishable : Verdict::Indistinguishable;
    return r;
}

} // namespace

Scene livshits_scene(const LivshitsParams& p, HiddenVariant variant) {
    check_params(p);
    const double a = p.semi_major;
    const double c = p.focal;
    const double b = semi_minor(p);
    const double m = 0.1 * (a - c);
    const double ox = a + p.wall;
    const double oy = b + p.wall;
    const double h = p.floor_depth;

    std::vector<ArcPiece> arcs;
    arcs.push_back(ArcPiece{inner_arc(p), {"inner-ellipse"}});
    arcs.push_back(segment({-a, 0, 0}, {-(a - m), 0, 0}));
    arcs.push_back(hidden_piece(p, -(a - m), -(c + m), variant));
    arcs.push_back(segment({-(c + m), 0, 0}, {-c, 0, 0}));
    arcs.push_back(segment({-c, 0, 0}, {-c, -h, 0}));
    arcs.push_back(segment({-c, -h, 0}, {-ox, -h, 0}));
    arcs.push_back(segment({-ox, -h, 0}, {-ox, 0, 0}));
    arcs.push_back(ArcPiece{EllipticArc{{0, 0, 0}, ox, oy, kPi, 0.0}, {"outer-ellipse"}});
    arcs.push_back(segment({ox, 0, 0}, {ox, -h, 0}));
    arcs.push_back(segment({ox, -h, 0}, {c, -h, 0}));
    arcs.push_back(segment({c, -h, 0}, {c, 0, 0}));
    arcs.push_back(segment({c, 0, 0}, {c + m, 0, 0}));
    arcs.push_back(hidden_piece(p, c + m, a - m, variant));
    arcs.push_back(segment({a - m, 0, 0}, {a, 0, 0}));

    Scene scene;
    scene.dimension = 2;
    scene.ball_center = {0, 0, 0};
    scene.ball_radius = p.ball_radius;
    scene.name = variant == HiddenVariant::Bump ? "livshits-h1" : "livshits-h2";
    scene.seed = p.seed;
    scene.curves.emplace_back(std::move(arcs));
    return scene;
}

double focal_return_crossing(const LivshitsParams& p, double entry_x, double elevation) {
    check_params(p);
    if (!(std::abs(entry_x) < p.focal) || !(elevation > 0.0 && elevation < kPi))
        throw ContractError("focal_return_crossing needs an upward ray entering between the foci");
    const ArcPiece inner{inner_arc(p), {}};
    const Vec3 dir{std::cos(elevation), std::sin(elevation), 0.0};
    const auto hit = ray_intersect(inner, {entry_x, 0, 0}, dir, 0.0);
    if (!hit) throw GeometryError("focal_return_crossing: ray left the cavity without touching the ellipse");
    const Vec3 v = reflect(dir, hit->normal);
    if (!(v.y < 0.0)) throw GeometryError("focal_return_crossing: reflected ray does not head back down");
    return hit->point.x - hit->point.y * v.x / v.y;
}

double focal_reflection_error(const LivshitsParams& p, std::size_t rays, std::uint64_t seed) {
    check_params(p);
    const EllipticArc arc = inner_arc(p);
    const ArcPiece inner{arc, {}};
    const Vec3 focus_a{-p.focal, 0, 0};
    const Vec3 focus_b{p.focal, 0, 0};
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < rays; ++i) {
        const Vec3 target = arc.point_at(kPi * uniform01(rng));
        const Vec3 dir = normalized(target - focus_a);
        const auto hit = ray_intersect(inner, focus_a, dir, 0.0);
        if (!hit) throw GeometryError("focal ray missed the inner ellipse");
        const Vec3 v = reflect(dir, hit->normal);
        const Vec3 rel = focus_b - hit->point;
        worst = std::max(worst, std::abs(rel.x * v.y - rel.y * v.x));
    }
    return worst;
}

std::vector<PhaseState> aperture_rays(const LivshitsParams& p, std::size_t count, std::uint64_t seed) {
    check_params(p);
    std::mt19937_64 rng(seed);
    std::vector<PhaseState> out;
    out.reserve(count);
    const double c = p.focal;
    const double a = p.ball_radius;
    while (out.size() < count) {
        const double xe = -c + 2.0 * c * uniform01(rng);
        const double elev = kPi * uniform01(rng);
        const Vec3 u{std::cos(elev), std::sin(elev), 0.0};
        // The backward line must pass through the channel mouth at y = −h.
        const double xb = xe - p.floor_depth * u.x / u.y;
        if (!(std::abs(xb) < c)) continue;
        const Vec3 entry{xe, 0, 0};
        const double proj = dot(entry, u);
        const double s = proj + std::sqrt(proj * proj - norm2(entry) + a * a);
        out.push_back({entry - s * u, u});
    }
    return out;
}

bool LivshitsReport::passed(double max_focal_error) const {
    return hidden_hits_bump == 0 && hidden_hits_flat == 0 && focal_error < max_focal_error &&
           returns_between_foci == returns_checked && sls.matched_fraction == 1.0 &&
           travel.matched_fraction == 1.0;
}

LivshitsReport livshits_demo(const LivshitsParams& p) {
    const Scene bump = livshits_scene(p, HiddenVariant::Bump);
    const Scene flat = livshits_scene(p, HiddenVariant::Flat);
    const TraceLimits limits = TraceLimits::for_scene(bump);

    LivshitsReport report;
    const auto rays = aperture_rays(p, p.aperture_rays, p.seed);
    report.aperture_rays = rays.size();

    struct RayOutcome {
        std::size_t hidden_bump = 0;
        std::size_t hidden_flat = 0;
        int returned = -1; // -1: no inner-ellipse reflection, 0: outside foci, 1: between foci
        bool cutoff_bump = false;
        bool cutoff_flat = false;
    };
    std::vector<RayOutcome> outcomes(rays.size());
    const auto& pieces = bump.curves.front().arcs();
    const auto& flat_pieces = flat.curves.front().arcs();
    parallel_for(rays.size(), [&](std::size_t i) {
        RayOutcome o;
        const TrajectoryRecord rb = trace(bump, rays[i], limits);
        const TrajectoryRecord rf = trace(flat, rays[i], limits);
        for (const auto& e : rb.events)
            if (pieces[static_cast<std::size_t>(e.arc)].has_tag(kHiddenTag)) ++o.hidden_bump;
        for (const auto& e : rf.events)
            if (flat_pieces[static_cast<std::size_t>(e.arc)].has_tag(kHiddenTag)) ++o.hidden_flat;
        for (const auto& e : rb.events) {
            if (e.arc != 0 || e.grazing) continue;
            const Vec3& v = e.direction_out;
            if (v.y < 0.0) {
                const double cross = e.point.x - e.point.y * v.x / v.y;
                o.returned = std::abs(cross) < p.focal ? 1 : 0;
            } else {
                o.returned = 0;
            }
            break;
        }
        o.cutoff_bump = !rb.escaped();
        o.cutoff_flat = !rf.escaped();
        outcomes[i] = o;
    });
    for (const auto& o : outcomes) {
        report.hidden_hits_bump += o.hidden_bump;
        report.hidden_hits_flat += o.hidden_flat;
        if (o.returned >= 0) {
            ++report.returns_checked;
            if (o.returned == 1) ++report.returns_between_foci;
        }
        report.cutoff_bump += o.cutoff_bump ? 1 : 0;
        report.cutoff_flat += o.cutoff_flat ? 1 : 0;
    }

    report.focal_rays = p.focal_rays;
    report.focal_error = focal_reflection_error(p, p.focal_rays, p.seed + 1);

    const double tol = 1e-6 * p.ball_radius;
    std::vector<DiscrepancyReport> sls_parts;
    for (std::size_t k = 0; k < p.sls_directions; ++k) {
        const double ang = 2.0 * kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(p.sls_directions);
        const Vec3 omega{std::cos(ang), std::sin(ang), 0.0};
        sls_parts.push_back(compare_spectra(scan_sls(bump, omega, p.sls_resolution, limits),
                                            scan_sls(flat, omega, p.sls_resolution, limits), tol));
    }
    report.sls = merge_reports(sls_parts, tol);

    ShootingParams shooting = ShootingParams::defaults(bump);
    shooting.seeds = p.travel_seeds;
    report.travel_bump = travelling_time_spectrum(bump, p.travel_points, 1.0, shooting);
    report.travel_flat = travelling_time_spectrum(flat, p.travel_points, 1.0, shooting);
    report.travel = compare_spectra(report.travel_bump, report.travel_flat, tol);
    return report;
}

} // namespace scatlab
