#include "scatlab/spectra.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/parallel.hpp"
#include "scatlab/scene_io.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace scatlab {
namespace {

constexpr double kDirectionMatch = 1e-9;
constexpr int kFanRefineLevels = 5;
constexpr int kFanRefineSplit = 8;
constexpr double kFanRefineJump = 0.2;

void require_unit(const Vec3& v, int dimension, const char* what) {
    if (std::abs(norm(v) - 1.0) > 1e-12 || (dimension == 2 && v.z != 0.0))
        throw ContractError(std::string(what) + " must be a unit vector of the scene dimension");
}

// ---------------------------------------------------------------------------
// Shooting

struct ExitInfo {
    bool usable = false;
    bool cutoff = false;
    Vec3 direction;
    Vec3 exit;
    double length = 0.0;
    Vec3 dir_out;
    std::size_t reflections = 0;
    std::vector<std::size_t> itinerary;
};

// Traces from x in direction u and locates the last crossing of S0 on the final free leg.
ExitInfo shoot(const Scene& scene, const Vec3& x, const Vec3& u, const TraceLimits& limits) {
    ExitInfo info;
    info.direction = u;
    const TrajectoryRecord rec = trace(scene, {x, u}, limits);
    if (!rec.escaped()) {
        info.cutoff = true;
        return info;
    }
    // A grazing contact sits on a branch boundary; such seeds never bracket.
    if (rec.has_grazing()) return info;
    const Vec3 p = rec.events.empty() ? x : rec.events.back().point;
    const double base = rec.events.empty() ? 0.0 : rec.events.back().cumulative_length;
    const Vec3 v = rec.final.direction;
    const Vec3 w = p - scene.ball_center;
    const double b = dot(w, v);
    const double c = dot(w, w) - scene.ball_radius * scene.ball_radius;
    const double disc = b * b - c;
    if (disc < 0.0) return info;
    const double s = -b + std::sqrt(disc);
    info.usable = true;
    info.exit = p + s * v;
    info.length = base + s;
    info.dir_out = v;
    info.itinerary = itinerary(rec);
    info.reflections = info.itinerary.size();
    return info;
}

double exit_angle_gap(const Vec3& center, const Vec3& p, const Vec3& q) {
    const Vec3 a = p - center;
    const Vec3 b = q - center;
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

struct SeedFan {
    Vec3 x;
    Vec3 inward;
    std::array<Vec3, 2> frame{};
    /// Planar: seed angles. Spatial: gnomonic coordinates (two per seed).
    std::vector<std::array<double, 2>> params;
    std::vector<ExitInfo> exits;
    std::size_t cutoff = 0;
};

Vec3 fan_direction(const SeedFan& fan, int dimension, const std::array<double, 2>& p) {
    if (dimension == 2) return std::cos(p[0]) * fan.inward + std::sin(p[0]) * fan.frame[0];
    return normalized(fan.inward + p[0] * fan.frame[0] + p[1] * fan.frame[1]);
}

SeedFan build_fan(const Scene& scene, const Vec3& x, const ShootingParams& params) {
    SeedFan fan;
    fan.x = x;
    fan.inward = normalized(scene.ball_center - x);
    const std::size_t n = params.seeds;
    if (scene.dimension == 2) {
        fan.frame = {perp2(fan.inward), Vec3{}};
        for (std::size_t k = 0; k < n; ++k) {
            const double alpha = -std::numbers::pi / 2 +
                                 (static_cast<double>(k) + 0.5) * std::numbers::pi / static_cast<double>(n);
            fan.params.push_back({alpha, 0.0});
        }
    } else {
        fan.frame = orthonormal_complement(fan.inward);
        for (const Vec3& d : sphere_directions(3, 2 * n)) {
            if (d.z <= 1e-3) continue;
            fan.params.push_back({d.x / d.z, d.y / d.z});
        }
    }
    fan.exits.reserve(fan.params.size());
    for (const auto& p : fan.params) fan.exits.push_back(shoot(scene, x, fan_direction(fan, scene.dimension, p), params.limits));

    // Planar fans are refined where neighbouring seeds change branch, so the
    // narrow windows of multi-reflection itineraries get seeds of their own.
    if (scene.dimension == 2) {
        for (int level = 0; level < kFanRefineLevels; ++level) {
            std::vector<std::array<double, 2>> np;
            std::vector<ExitInfo> ne;
            bool changed = false;
            for (std::size_t k = 0; k < fan.params.size(); ++k) {
                np.push_back(fan.params[k]);
                ne.push_back(std::move(fan.exits[k]));
                if (k + 1 == fan.params.size()) break;
                const ExitInfo& a = ne.back();
                const ExitInfo& b = fan.exits[k + 1];
                const bool same = a.usable == b.usable && a.cutoff == b.cutoff && a.itinerary == b.itinerary;
                // A large jump of the exit point can hide a whole window between two seeds.
                if (same && (!a.usable || exit_angle_gap(scene.ball_center, a.exit, b.exit) < kFanRefineJump)) continue;
                if (a.cutoff && b.cutoff) continue;
                const double lo = fan.params[k][0];
                const double hi = fan.params[k + 1][0];
                for (int i = 1; i < kFanRefineSplit; ++i) {
                    const double alpha = lo + (hi - lo) * i / kFanRefineSplit;
                    np.push_back({alpha, 0.0});
                    ne.push_back(shoot(scene, x, fan_direction(fan, 2, {alpha, 0.0}), params.limits));
                }
                changed = true;
            }
            fan.params = std::move(np);
            fan.exits = std::move(ne);
            if (!changed) break;
        }
    }
    for (const auto& e : fan.exits)
        if (e.cutoff) ++fan.cutoff;
    return fan;
}

struct BranchLost {};

TravelSample make_sample(const SeedFan& fan, const Vec3& y, const ExitInfo& e) {
    TravelSample s;
    s.x = fan.x;
    s.y = y;
    s.t = e.length;
    s.reflections = e.reflections;
    s.dir_in = e.direction;
    s.dir_out = e.dir_out;
    s.residual = distance(e.exit, y);
    s.itinerary = e.itinerary;
    return s;
}

// Signed angle from y to the exit point, seen from the ball center.
double planar_miss(const Vec3& center, const Vec3& y, const Vec3& exit) {
    const Vec3 yr = y - center;
    const Vec3 er = exit - center;
    return std::atan2(yr.x * er.y - yr.y * er.x, dot(yr, er));
}

// Roots of the exit miss on one branch between two seeds. A bracket whose
// interior leaves the branch is subdivided a few times before it is dropped.
void refine_bracket(const Scene& scene, const SeedFan& fan, const Vec3& y, const ShootingParams& params,
                    double a0, double a1, const ExitInfo& e0, const ExitInfo& e1, int depth, GeodesicSearch& out) {
    if (!e0.usable || !e1.usable || e0.itinerary != e1.itinerary) return;
    const double f0 = planar_miss(scene.ball_center, y, e0.exit);
    const double f1 = planar_miss(scene.ball_center, y, e1.exit);
    if (f0 == 0.0 || f1 == 0.0 || (f0 < 0.0) == (f1 < 0.0) || std::abs(f0 - f1) >= std::numbers::pi) return;

    const auto& branch = e0.itinerary;
    auto eval = [&](double alpha) {
        ExitInfo e = shoot(scene, fan.x, fan_direction(fan, 2, {alpha, 0.0}), params.limits);
        if (!e.usable || e.itinerary != branch) throw BranchLost{};
        return e;
    };
    try {
        auto f = [&](double alpha) { return planar_miss(scene.ball_center, y, eval(alpha).exit); };
        std::uintmax_t iters = 200;
        auto done = [](double lo, double hi) {
            return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
        };
        const auto [lo, hi] = boost::math::tools::toms748_solve(f, a0, a1, f0, f1, done, iters);
        const ExitInfo elo = eval(lo);
        const ExitInfo ehi = eval(hi);
        const ExitInfo& best = distance(elo.exit, y) <= distance(ehi.exit, y) ? elo : ehi;
        TravelSample s = make_sample(fan, y, best);
        if (s.residual < params.tol) {
            out.samples.push_back(std::move(s));
        } else if (std::abs(planar_miss(scene.ball_center, y, best.exit)) < std::numbers::pi / 2) {
            // Converging onto the antipode of y is a wrap of the angle, not a lost root.
            ++out.dropped_clusters;
        }
    } catch (const BranchLost&) {
        if (depth >= 3) {
            ++out.dropped_clusters;
            return;
        }
        constexpr int kPieces = 16;
        std::vector<double> alphas(kPieces + 1);
        std::vector<ExitInfo> exits(kPieces + 1);
        for (int i = 0; i <= kPieces; ++i) {
            alphas[i] = i == 0 ? a0 : i == kPieces ? a1 : a0 + (a1 - a0) * i / kPieces;
            exits[i] = i == 0 ? e0 : i == kPieces ? e1 : shoot(scene, fan.x, fan_direction(fan, 2, {alphas[i], 0.0}), params.limits);
        }
        for (int i = 0; i < kPieces; ++i) {
            if (exits[i].usable && exits[i + 1].usable && exits[i].itinerary == exits[i + 1].itinerary)
                refine_bracket(scene, fan, y, params, alphas[i], alphas[i + 1], exits[i], exits[i + 1], depth + 1, out);
        }
    }
}

void search_planar(const Scene& scene, const SeedFan& fan, const Vec3& y, const ShootingParams& params,
                   GeodesicSearch& out) {
    const auto& ex = fan.exits;
    for (std::size_t k = 0; k < ex.size(); ++k) {
        if (!ex[k].usable) continue;
        if (planar_miss(scene.ball_center, y, ex[k].exit) == 0.0) {
            out.samples.push_back(make_sample(fan, y, ex[k]));
            continue;
        }
        if (k + 1 < ex.size())
            refine_bracket(scene, fan, y, params, fan.params[k][0], fan.params[k + 1][0], ex[k], ex[k + 1], 0, out);
    }
}

// Gauss–Newton on the 3-vector exit miss over the two gnomonic direction coordinates.
std::optional<ExitInfo> refine_spatial(const Scene& scene, const SeedFan& fan, const Vec3& y,
                                       const ShootingParams& params, std::array<double, 2> p,
                                       const std::vector<std::size_t>& branch) {
    auto eval = [&](const std::array<double, 2>& q) -> std::optional<ExitInfo> {
        ExitInfo e = shoot(scene, fan.x, fan_direction(fan, 3, q), params.limits);
        if (!e.usable || e.itinerary != branch) return std::nullopt;
        return e;
    };
    auto current = eval(p);
    if (!current) return std::nullopt;
    double res = distance(current->exit, y);
    for (int it = 0; it < 60 && res > 1e-3 * params.tol; ++it) {
        const double h = 1e-7 * (1.0 + std::abs(p[0]) + std::abs(p[1]));
        const auto e0 = eval({p[0] + h, p[1]});
        const auto e1 = eval({p[0], p[1] + h});
        if (!e0 || !e1) return std::nullopt;
        const Vec3 r = current->exit - y;
        const Vec3 j0 = (e0->exit - current->exit) * (1.0 / h);
        const Vec3 j1 = (e1->exit - current->exit) * (1.0 / h);
        const double a00 = dot(j0, j0);
        const double a01 = dot(j0, j1);
        const double a11 = dot(j1, j1);
        const double det = a00 * a11 - a01 * a01;
        if (!(std::abs(det) > 1e-300)) return std::nullopt;
        const double g0 = -dot(j0, r);
        const double g1 = -dot(j1, r);
        const std::array<double, 2> step{(a11 * g0 - a01 * g1) / det, (a00 * g1 - a01 * g0) / det};
        double lambda = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
            const std::array<double, 2> q{p[0] + lambda * step[0], p[1] + lambda * step[1]};
            auto trial = eval(q);
            if (trial && distance(trial->exit, y) < res) {
                p = q;
                current = std::move(trial);
                res = distance(current->exit, y);
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (res < params.tol) return current;
    return std::nullopt;
}

void search_spatial(const Scene& scene, const SeedFan& fan, const Vec3& y, const ShootingParams& params,
                    GeodesicSearch& out) {
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < fan.exits.size(); ++k)
        if (fan.exits[k].usable) groups[fan.exits[k].itinerary].push_back(k);

    const double spacing = std::sqrt(4.0 * std::numbers::pi / static_cast<double>(2 * params.seeds));
    for (auto& [branch, members] : groups) {
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t k : members) {
            const double m = distance(fan.exits[k].exit, y);
            ranked.emplace_back(m, k);
        }
        std::sort(ranked.begin(), ranked.end());
        std::vector<Vec3> starts;
        for (const auto& [m, k] : ranked) {
            if (starts.size() >= 3) break;
            const Vec3 u = fan.exits[k].direction;
            bool separated = true;
            for (const Vec3& s : starts) separated = separated && std::acos(std::clamp(dot(s, u), -1.0, 1.0)) > 3.0 * spacing;
            if (!separated) continue;
            starts.push_back(u);
            if (auto e = refine_spatial(scene, fan, y, params, fan.params[k], branch)) {
                out.samples.push_back(make_sample(fan, y, *e));
            } else {
                ++out.dropped_clusters;
            }
        }
    }
}

void finalize(std::vector<TravelSample>& samples, double dedup) {
    std::stable_sort(samples.begin(), samples.end(), [](const TravelSample& a, const TravelSample& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.itinerary < b.itinerary;
    });
    std::vector<TravelSample> kept;
    for (auto& s : samples) {
        const bool dup = std::any_of(kept.begin(), kept.end(), [&](const TravelSample& k) {
            return k.itinerary == s.itinerary && std::abs(k.t - s.t) < dedup;
        });
        if (!dup) kept.push_back(std::move(s));
    }
    samples = std::move(kept);
}

GeodesicSearch search_from_fan(const Scene& scene, const SeedFan& fan, const Vec3& y, const ShootingParams& params) {
    GeodesicSearch out;
    out.cutoff_seeds = fan.cutoff;
    if (scene.dimension == 2) {
        search_planar(scene, fan, y, params, out);
    } else {
        search_spatial(scene, fan, y, params, out);
    }
    finalize(out.samples, params.dedup);
    return out;
}

void require_on_sphere(const Scene& scene, const Vec3& p, const char* what) {
    const double r = distance(p, scene.ball_center);
    if (std::abs(r - scene.ball_radius) > 1e-9 * (1.0 + scene.ball_radius) || (scene.dimension == 2 && p.z != 0.0))
        throw ContractError(std::string(what) + " must lie on the reference sphere");
}

} // namespace

// ---------------------------------------------------------------------------

std::size_t SpectrumTable::cell_count() const {
    return grid.kind == SpectrumKind::Sls ? sls_lattice(grid).size() : travel_pairs(grid).size();
}

std::vector<std::vector<double>> SpectrumTable::times_by_cell() const {
    std::vector<std::vector<double>> out(cell_count());
    for (const auto& s : sls) out.at(s.cell).push_back(s.sojourn);
    for (const auto& s : travel) out.at(s.cell).push_back(s.t);
    return out;
}

std::vector<LatticePoint> sls_lattice(const GridSpec& grid) {
    std::vector<LatticePoint> out;
    const double a = grid.ball_radius;
    const auto n = static_cast<double>(grid.resolution);
    auto coord = [&](std::size_t i) { return a * (2.0 * static_cast<double>(i) + 1.0 - n) / n; };
    const Vec3 base = grid.ball_center - a * grid.omega;
    if (grid.dimension == 2) {
        const Vec3 e1 = perp2(grid.omega);
        for (std::size_t i = 0; i < grid.resolution; ++i) {
            const double b = coord(i);
            out.push_back({out.size(), {b, 0.0}, base + b * e1});
        }
    } else {
        const auto frame = orthonormal_complement(grid.omega);
        for (std::size_t i = 0; i < grid.resolution; ++i)
            for (std::size_t j = 0; j < grid.resolution; ++j) {
                const double b1 = coord(i);
                const double b2 = coord(j);
                if (b1 * b1 + b2 * b2 > a * a) continue;
                out.push_back({out.size(), {b1, b2}, base + b1 * frame[0] + b2 * frame[1]});
            }
    }
    return out;
}

std::vector<Vec3> travel_points(const GridSpec& grid) {
    std::vector<Vec3> pts = sphere_directions(grid.dimension, grid.resolution);
    for (Vec3& p : pts) p = grid.ball_center + grid.ball_radius * p;
    return pts;
}

std::vector<std::array<std::size_t, 2>> travel_pairs(const GridSpec& grid) {
    const auto dirs = sphere_directions(grid.dimension, grid.resolution);
    const double min_cos = std::cos(grid.min_separation_deg * std::numbers::pi / 180.0);
    std::vector<std::array<std::size_t, 2>> out;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = 0; j < dirs.size(); ++j)
            if (i != j && dot(dirs[i], dirs[j]) < min_cos) out.push_back({i, j});
    return out;
}

double sojourn_time(const Scene& scene, const TrajectoryRecord& record, const Vec3& omega, const Vec3& theta) {
    if (!record.escaped()) throw ContractError("sojourn_time needs an escaped trajectory");
    if (distance(record.initial.direction, omega) > kDirectionMatch ||
        distance(record.final.direction, theta) > kDirectionMatch)
        throw ContractError("sojourn_time: trajectory directions do not match (omega, theta)");

    // Incoming leg from Z_ω: a + ⟨x₁ − c, ω⟩. Outgoing leg to Z_{−θ}: a − ⟨x_k − c, θ⟩.
    const Vec3& c = scene.ball_center;
    const auto& ev = record.events;
    if (ev.empty()) {
        const Vec3 w = record.initial.point - c;
        return dot(w, omega) - dot(w, theta);
    }
    double inner = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) inner += distance(ev[k].point, ev[k + 1].point);
    return dot(ev.front().point - c, omega) + inner - dot(ev.back().point - c, theta);
}

SpectrumTable scan_sls(const Scene& scene, const Vec3& omega, std::size_t resolution, const TraceLimits& limits) {
    require_unit(omega, scene.dimension, "omega");
    if (resolution == 0) throw ContractError("SLS lattice resolution must be positive");

    SpectrumTable table;
    table.scene_digest = scene_digest(scene);
    table.grid.kind = SpectrumKind::Sls;
    table.grid.dimension = scene.dimension;
    table.grid.ball_center = scene.ball_center;
    table.grid.ball_radius = scene.ball_radius;
    table.grid.omega = omega;
    table.grid.resolution = resolution;
    table.grid.max_reflections = limits.max_reflections;

    const auto lattice = sls_lattice(table.grid);
    std::vector<TrajectoryRecord> records(lattice.size());
    parallel_for(lattice.size(), [&](std::size_t i) { records[i] = trace(scene, {lattice[i].launch, omega}, limits); });

    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.escaped()) {
            ++table.diagnostics.cutoff;
            continue;
        }
        SlsSample s;
        s.cell = lattice[i].cell;
        s.omega = omega;
        s.impact = lattice[i].impact;
        s.theta = rec.final.direction;
        s.sojourn = sojourn_time(scene, rec, omega, s.theta);
        s.itinerary = itinerary(rec);
        s.reflections = s.itinerary.size();
        s.grazing = rec.has_grazing();
        if (s.grazing) ++table.diagnostics.grazing;
        table.sls.push_back(std::move(s));
    }
    return table;
}

ShootingParams ShootingParams::defaults(const Scene& scene) {
    ShootingParams p;
    p.seeds = scene.dimension == 2 ? 720 : 2000;
    p.tol = 1e-7 * scene.ball_radius;
    p.dedup = 1e-5 * scene.ball_radius;
    p.limits = TraceLimits::for_scene(scene);
    return p;
}

GeodesicSearch find_xy_geodesics(const Scene& scene, const Vec3& x, const Vec3& y, const ShootingParams& params) {
    require_on_sphere(scene, x, "x");
    require_on_sphere(scene, y, "y");
    if (distance(x, y) <= 1e-9 * scene.ball_radius) throw ContractError("find_xy_geodesics needs x != y");
    if (params.seeds < 2) throw ContractError("shooting needs at least two seeds");
    const SeedFan fan = build_fan(scene, x, params);
    return search_from_fan(scene, fan, y, params);
}

SpectrumTable travelling_time_spectrum(const Scene& scene, std::size_t points, double min_separation_deg,
                                       const ShootingParams& params) {
    if (points < 2) throw ContractError("travel grid needs at least two points");
    if (params.seeds < 2) throw ContractError("shooting needs at least two seeds");

    SpectrumTable table;
    table.scene_digest = scene_digest(scene);
    GridSpec& g = table.grid;
    g.kind = SpectrumKind::Travel;
    g.dimension = scene.dimension;
    g.ball_center = scene.ball_center;
    g.ball_radius = scene.ball_radius;
    g.resolution = points;
    g.min_separation_deg = min_separation_deg;
    g.seeds = params.seeds;
    g.tol = params.tol;
    g.dedup = params.dedup;
    g.max_reflections = params.limits.max_reflections;

    const auto pts = travel_points(g);
    const auto pairs = travel_pairs(g);

    std::vector<SeedFan> fans(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { fans[i] = build_fan(scene, pts[i], params); });

    std::vector<GeodesicSearch> results(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t c) {
        results[c] = search_from_fan(scene, fans[pairs[c][0]], pts[pairs[c][1]], params);
    });

    for (const auto& fan : fans) table.diagnostics.cutoff += fan.cutoff;
    for (std::size_t c = 0; c < results.size(); ++c) {
        table.diagnostics.dropped_clusters += results[c].dropped_clusters;
        for (auto& s : results[c].samples) {
            s.cell = c;
            table.travel.push_back(std::move(s));
        }
    }
    return table;
}

} // namespace scatlab
