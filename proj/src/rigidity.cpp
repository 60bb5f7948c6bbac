#include "scatlab/rigidity.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/kernels.hpp"
#include "scatlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace scatlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec3 random_unit(std::mt19937_64& rng, int dimension) {
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    if (dimension == 2) return {std::cos(phi), std::sin(phi), 0.0};
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

} // namespace

double hausdorff_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return kInf;
    auto directed = [](std::span<const double> from, std::span<const double> to) {
        double worst = 0.0;
        for (double u : from) {
            double best = kInf;
            for (double v : to) best = std::min(best, std::abs(u - v));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

DiscrepancyReport compare_spectra(const SpectrumTable& a, const SpectrumTable& b, double tol) {
    if (!(a.grid == b.grid)) throw ContractError("compare_spectra: tables were sampled on different grids");
    if (!(tol >= 0.0)) throw ContractError("compare_spectra: tolerance must be non-negative");
    const auto ta = a.times_by_cell();
    const auto tb = b.times_by_cell();

    DiscrepancyReport r;
    r.tol = tol;
    r.per_cell.resize(ta.size());
    for (std::size_t c = 0; c < ta.size(); ++c) {
        const double h = hausdorff_1d(ta[c], tb[c]);
        r.per_cell[c] = h;
        if (std::isinf(h)) {
            ++r.sentinel_cells;
        } else {
            r.max_discrepancy = std::max(r.max_discrepancy, h);
        }
        if (h > tol) ++r.mismatched_cells;
    }
    const double cells = static_cast<double>(ta.size());
    const double mismatch = ta.empty() ? 0.0 : static_cast<double>(r.mismatched_cells) / cells;
    r.matched_fraction = 1.0 - mismatch;
    r.verdict = mismatch >= kAlmostSameMismatch ? Verdict::Distinguishable : Verdict::Indistinguishable;
    return r;
}

ProbeReport reflection_count_probe(const Scene& a, const Scene& b, std::span<const PhaseState> probes_a,
                                   std::span<const PhaseState> probes_b, const TraceLimits& limits) {
    if (probes_a.size() != probes_b.size())
        throw ContractError("reflection_count_probe: probe lists differ in length");
    ProbeReport r;
    r.counts.resize(probes_a.size());
    parallel_for(probes_a.size(), [&](std::size_t i) {
        r.counts[i] = {trace(a, probes_a[i], limits).reflection_count(),
                       trace(b, probes_b[i], limits).reflection_count()};
    });
    for (const auto& [ca, cb] : r.counts)
        if (ca == cb) ++r.equal;
    r.equal_fraction = r.counts.empty() ? 1.0 : static_cast<double>(r.equal) / static_cast<double>(r.counts.size());
    return r;
}

ProbeReport reflection_count_probe(const Scene& a, const Scene& b, std::span<const PhaseState> probes,
                                   const TraceLimits& limits) {
    return reflection_count_probe(a, b, probes, probes, limits);
}

std::vector<PhaseState> random_sphere_probes(const Scene& scene, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PhaseState> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Vec3 n = random_unit(rng, scene.dimension);
        const Vec3 x = scene.ball_center + scene.ball_radius * n;
        Vec3 u;
        if (scene.dimension == 2) {
            const double alpha = std::numbers::pi * (uniform01(rng) - 0.5);
            u = std::cos(alpha) * (-n) + std::sin(alpha) * perp2(-n);
        } else {
            u = random_unit(rng, 3);
            if (dot(u, n) > 0.0) u = -u;
        }
        out.push_back({x, u});
    }
    return out;
}

CoverageReport accessible_coverage(const Scene& scene, std::size_t rays, double eps, const TraceLimits& limits,
                                   std::uint64_t seed) {
    if (rays < 1) throw ContractError("accessible_coverage needs at least one ray");
    CoverageReport report;
    report.rays = rays;
    if (scene.obstacle_count() == 0) return report;

    const auto probes = random_sphere_probes(scene, rays, seed);
    std::vector<TrajectoryRecord> records(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) { records[i] = trace(scene, probes[i], limits); });

    // One mark cloud per body and per curve piece.
    std::vector<std::size_t> piece_base(scene.curves.size());
    std::size_t slots = scene.bodies.size();
    for (std::size_t c = 0; c < scene.curves.size(); ++c) {
        piece_base[c] = slots;
        slots += scene.curves[c].arcs().size();
    }
    auto slot_of = [&](std::size_t obstacle, int arc) {
        if (scene.is_body(obstacle)) return obstacle;
        return piece_base[obstacle - scene.bodies.size()] + static_cast<std::size_t>(arc);
    };
    std::vector<simd::PointCloud> marks(slots);
    for (const auto& rec : records) {
        if (!rec.escaped()) continue;
        ++report.escaped;
        for (const auto& e : rec.events) {
            if (e.grazing) continue;
            marks[slot_of(e.obstacle, e.arc)].push_back(e.point);
            ++report.marks;
        }
    }

    auto measure = [&](PieceCoverage& pc, const std::vector<Vec3>& samples, const simd::PointCloud& cloud) {
        pc.samples = samples.size();
        for (const Vec3& p : samples) {
            if (!cloud.empty() && simd::min_distance2(cloud, p).value <= eps * eps) {
                ++pc.covered;
            } else {
                pc.unreached.push_back(p);
            }
        }
        pc.coverage = samples.empty() ? 0.0 : static_cast<double>(pc.covered) / static_cast<double>(samples.size());
    };

    const std::size_t body_samples = scene.dimension == 2 ? 1000 : 4000;
    for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        PieceCoverage pc;
        pc.obstacle = i;
        measure(pc, sample_boundary(scene.bodies[i], scene.dimension, body_samples), marks[i]);
        report.pieces.push_back(std::move(pc));
    }
    for (std::size_t c = 0; c < scene.curves.size(); ++c) {
        const auto& arcs = scene.curves[c].arcs();
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            PieceCoverage pc;
            pc.obstacle = scene.bodies.size() + c;
            pc.arc = static_cast<int>(k);
            pc.tags = arcs[k].tags;
            measure(pc, sample_piece(arcs[k], 200), marks[piece_base[c] + k]);
            report.pieces.push_back(std::move(pc));
        }
    }
    return report;
}

BoundaryEstimate reconstruct_boundary(const SpectrumTable& table, const Vec3& ball_center, double ball_radius) {
    if (table.grid.kind != SpectrumKind::Travel) throw ContractError("reconstruction needs a travelling-time table");
    BoundaryEstimate est;
    for (const auto& s : table.travel) {
        if (s.reflections != 1) continue;
        const Vec3 xy = s.x - s.y;
        const double denom = 2.0 * (s.t + dot(xy, s.dir_out));
        const double tau = denom != 0.0 ? (s.t * s.t - norm2(xy)) / denom : -1.0;
        if (!(tau > 0.0 && tau < s.t)) {
            ++est.skipped;
            continue;
        }
        const Vec3 p = s.y - tau * s.dir_out;
        const double consistency = std::abs(distance(s.x, p) + distance(p, s.y) - s.t);
        if (!(consistency < 1e-6) || !(distance(p, ball_center) < ball_radius)) {
            ++est.filtered;
            continue;
        }
        est.points.push_back({p, s.cell, s.x, s.y, s.t, s.dir_out});
    }
    return est;
}

std::vector<Vec3> one_reflection_accessible_boundary(const Scene& scene, std::size_t samples_per_body,
                                                     std::size_t directions) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
        const ConvexBody& body = scene.bodies[i];
        HitQuery q;
        q.skip_obstacle = i;
        for (const Vec3& p : sample_boundary(body, scene.dimension, samples_per_body)) {
            const Vec3 n = body.outward_normal(p);
            std::vector<Vec3> tangents;
            if (scene.dimension == 2) {
                tangents.push_back(perp2(n));
            } else {
                const auto f = orthonormal_complement(n);
                for (int k = 0; k < 6; ++k) {
                    const double psi = std::numbers::pi * k / 6.0;
                    tangents.push_back(std::cos(psi) * f[0] + std::sin(psi) * f[1]);
                }
            }
            bool reachable = false;
            for (const Vec3& t : tangents) {
                for (std::size_t k = 0; k < directions && !reachable; ++k) {
                    // Incidence angles strictly inside (−π/2, π/2).
                    const double beta = std::numbers::pi *
                                        ((static_cast<double>(k) + 0.5) / static_cast<double>(directions) - 0.5);
                    const Vec3 out_dir = std::cos(beta) * n + std::sin(beta) * t;
                    const Vec3 back_dir = std::cos(beta) * n - std::sin(beta) * t;
                    reachable = !scene_first_hit(scene, p, out_dir, q) && !scene_first_hit(scene, p, back_dir, q);
                }
                if (reachable) break;
            }
            if (reachable) out.push_back(p);
        }
    }
    return out;
}

PointSetDistance hausdorff_points(std::span<const Vec3> a, std::span<const Vec3> b) {
    PointSetDistance d;
    if (a.empty() || b.empty()) {
        d.forward = d.backward = d.hausdorff = (a.empty() && b.empty()) ? 0.0 : kInf;
        return d;
    }
    const simd::PointCloud ca(a);
    const simd::PointCloud cb(b);
    for (double v : simd::nearest_distance2(cb, ca)) d.forward = std::max(d.forward, v);
    for (double v : simd::nearest_distance2(ca, cb)) d.backward = std::max(d.backward, v);
    d.forward = std::sqrt(d.forward);
    d.backward = std::sqrt(d.backward);
    d.hausdorff = std::max(d.forward, d.backward);
    return d;
}

} // namespace scatlab
