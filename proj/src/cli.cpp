#include "scatlab/cli.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/livshits.hpp"
#include "scatlab/rigidity.hpp"
#include "scatlab/scene_io.hpp"
#include "scatlab/table_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace scatlab {
namespace {

const char* kVerdictName[] = {"indistinguishable", "distinguishable"};

Vec3 parse_vector(const std::string& text, int dimension, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ContractError(what + ": '" + part + "' is not a number");
        }
    }
    if (values.size() != static_cast<std::size_t>(dimension))
        throw ContractError(what + " needs " + std::to_string(dimension) + " comma-separated components");
    Vec3 v;
    for (int i = 0; i < dimension; ++i) v[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i)];
    return v;
}

std::uint64_t require_seed(const Scene& scene, const std::string& path) {
    if (!scene.seed)
        throw SceneParseError({{0, 0, "metadata.seed", path + ": randomized subcommands need a seed in the scene document"}});
    return *scene.seed;
}

// Writes to the file when a path is given, else to the console stream.
template <class Emit>
void emit(const std::string& path, std::ostream& console, Emit&& body) {
    if (path.empty()) {
        body(console);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write " + path);
    body(file);
    if (!file) throw IoError("write failed for " + path);
}

TraceLimits limits_for(const Scene& scene, std::size_t max_reflections) {
    TraceLimits limits = TraceLimits::for_scene(scene);
    if (max_reflections > 0) limits.max_reflections = max_reflections;
    return limits;
}

struct Options {
    std::string scene;
    std::string scene_b;
    std::string table_a;
    std::string table_b;
    std::string out;
    std::string from;
    std::string dir;
    std::string omega;
    std::string truth;
    std::string out_dir;
    std::size_t grid = 512;
    std::size_t points = 64;
    std::size_t seeds = 0;
    std::size_t probes = 1000;
    std::size_t rays = 100000;
    std::size_t max_reflections = 0;
    double min_sep = 1.0;
    double tol = 1e-6;
    double eps = 0.05;
    double rotate_deg = 0.0;
    std::uint64_t seed = 1;
    bool quick = false;
};

int cmd_validate(const Options& o, std::ostream& out) {
    const Scene scene = load_scene(o.scene);
    for (const auto& note : validate_scene(scene).notes) out << "note: " << note << "\n";
    out << "OK\n";
    return 0;
}

int cmd_trace(const Options& o, std::ostream& out) {
    const Scene scene = load_scene(o.scene);
    const int d = scene.dimension;
    const Vec3 from = parse_vector(o.from, d, "--from");
    const Vec3 dir = parse_vector(o.dir, d, "--dir");
    if (!(norm(dir) > 0.0)) throw ContractError("--dir must be nonzero");
    const TrajectoryRecord rec = trace(scene, {from, normalized(dir)}, limits_for(scene, o.max_reflections));
    const int p = output_precision();
    emit(o.out, out, [&](std::ostream& os) {
        os << "event,obstacle,arc";
        for (int i = 1; i <= d; ++i) os << ",p_" << i;
        for (int i = 1; i <= d; ++i) os << ",n_" << i;
        os << ",grazing,length\n";
        for (std::size_t k = 0; k < rec.events.size(); ++k) {
            const auto& e = rec.events[k];
            os << k << "," << e.obstacle << "," << e.arc;
            for (int i = 0; i < d; ++i) os << "," << format_double(e.point[static_cast<std::size_t>(i)], p);
            for (int i = 0; i < d; ++i) os << "," << format_double(e.normal[static_cast<std::size_t>(i)], p);
            os << "," << (e.grazing ? 1 : 0) << "," << format_double(e.cumulative_length, p) << "\n";
        }
    });
    out << "classification=" << (rec.escaped() ? "escaped" : "cutoff") << " reflections=" << rec.reflection_count()
        << " length=" << format_double(rec.total_length, p) << " itinerary=" << join_itinerary(itinerary(rec)) << "\n";
    return 0;
}

int cmd_sls(const Options& o, std::ostream& out) {
    const Scene scene = load_scene(o.scene);
    Vec3 omega = parse_vector(o.omega, scene.dimension, "--omega");
    if (!(norm(omega) > 0.0)) throw ContractError("--omega must be nonzero");
    omega = normalized(omega);
    const SpectrumTable table = scan_sls(scene, omega, o.grid, limits_for(scene, o.max_reflections));
    emit(o.out, out, [&](std::ostream& os) { write_table_csv(os, table, output_precision()); });
    if (!o.out.empty())
        out << "samples=" << table.sls.size() << " cutoff=" << table.diagnostics.cutoff
            << " grazing=" << table.diagnostics.grazing << "\n";
    return 0;
}

int cmd_travel(const Options& o, std::ostream& out) {
    const Scene scene = load_scene(o.scene);
    ShootingParams params = ShootingParams::defaults(scene);
    if (o.seeds > 0) params.seeds = o.seeds;
    params.limits = limits_for(scene, o.max_reflections);
    const SpectrumTable table = travelling_time_spectrum(scene, o.points, o.min_sep, params);
    emit(o.out, out, [&](std::ostream& os) { write_table_csv(os, table, output_precision()); });
    if (!o.out.empty())
        out << "samples=" << table.travel.size() << " cells=" << table.cell_count()
            << " dropped_clusters=" << table.diagnostics.dropped_clusters << "\n";
    return 0;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const SpectrumTable a = load_table_csv(o.table_a);
    const SpectrumTable b = load_table_csv(o.table_b);
    const DiscrepancyReport r = compare_spectra(a, b, o.tol);
    if (!o.out.empty()) emit(o.out, out, [&](std::ostream& os) { write_discrepancy_csv(os, r, output_precision()); });
    out << "cells=" << r.per_cell.size() << " matched_fraction=" << format_double(r.matched_fraction, 6)
        << " max_discrepancy=" << format_double(r.max_discrepancy, 6) << " mismatched=" << r.mismatched_cells
        << " one_sided=" << r.sentinel_cells << "\n";
    out << "verdict: " << kVerdictName[static_cast<int>(r.verdict)] << "\n";
    return 0;
}

int cmd_probe_counts(const Options& o, std::ostream& out) {
    const Scene a = load_scene(o.scene);
    const Scene b = load_scene(o.scene_b);
    if (a.dimension != b.dimension) throw ContractError("probe-counts needs scenes of equal dimension");
    const auto probes_a = random_sphere_probes(a, o.probes, require_seed(a, o.scene));
    // Probes for the second scene are the first scene's probes moved by the rotation about z.
    const Mat3 q = rotation_z(o.rotate_deg * std::numbers::pi / 180.0);
    std::vector<PhaseState> probes_b;
    probes_b.reserve(probes_a.size());
    for (const auto& s : probes_a)
        probes_b.push_back({b.ball_center + q * (s.point - a.ball_center), q * s.direction});
    const ProbeReport r = reflection_count_probe(a, b, probes_a, probes_b, limits_for(a, o.max_reflections));
    if (!o.out.empty())
        emit(o.out, out, [&](std::ostream& os) {
            os << "probe,count_a,count_b\n";
            for (std::size_t i = 0; i < r.counts.size(); ++i)
                os << i << "," << r.counts[i].first << "," << r.counts[i].second << "\n";
        });
    out << "probes=" << r.counts.size() << " equal=" << r.equal
        << " equal_fraction=" << format_double(r.equal_fraction, 6) << "\n";
    return 0;
}

int cmd_coverage(const Options& o, std::ostream& out) {
    const Scene scene = load_scene(o.scene);
    const std::uint64_t seed = require_seed(scene, o.scene);
    const CoverageReport r = accessible_coverage(scene, o.rays, o.eps, limits_for(scene, o.max_reflections), seed);
    const int p = output_precision();
    auto tags = [](const PieceCoverage& pc) {
        std::string s;
        for (std::size_t i = 0; i < pc.tags.size(); ++i) s += (i ? ";" : "") + pc.tags[i];
        return s;
    };
    if (!o.out.empty())
        emit(o.out, out, [&](std::ostream& os) {
            os << "obstacle,arc,tags,samples,covered,coverage\n";
            for (const auto& pc : r.pieces)
                os << pc.obstacle << "," << pc.arc << "," << tags(pc) << "," << pc.samples << "," << pc.covered << ","
                   << format_double(pc.coverage, p) << "\n";
        });
    out << "rays=" << r.rays << " escaped=" << r.escaped << " marks=" << r.marks << "\n";
    for (const auto& pc : r.pieces) {
        out << "obstacle " << pc.obstacle;
        if (pc.arc >= 0) out << " arc " << pc.arc;
        if (!pc.tags.empty()) out << " [" << tags(pc) << "]";
        out << ": coverage " << format_double(pc.coverage, 6) << "\n";
    }
    return 0;
}

int cmd_reconstruct(const Options& o, std::ostream& out) {
    const SpectrumTable table = load_table_csv(o.table_a);
    const BoundaryEstimate est = reconstruct_boundary(table, table.grid.ball_center, table.grid.ball_radius);
    emit(o.out, out, [&](std::ostream& os) {
        write_reconstruction_csv(os, est, table.grid.dimension, output_precision());
    });
    if (!o.out.empty())
        out << "points=" << est.points.size() << " skipped=" << est.skipped << " filtered=" << est.filtered << "\n";
    if (!o.truth.empty()) {
        const Scene scene = load_scene(o.truth);
        const auto truth = one_reflection_accessible_boundary(scene, scene.dimension == 2 ? 2000 : 4000, 64);
        std::vector<Vec3> pts;
        for (const auto& e : est.points) pts.push_back(e.point);
        const PointSetDistance dist = hausdorff_points(pts, truth);
        out << "hausdorff=" << format_double(dist.hausdorff, 6) << " estimate_to_truth=" << format_double(dist.forward, 6)
            << " truth_to_estimate=" << format_double(dist.backward, 6) << "\n";
    }
    return 0;
}

int cmd_demo_livshits(const Options& o, std::ostream& out) {
    LivshitsParams params;
    params.aperture_rays = o.rays;
    params.seed = o.seed;
    if (o.quick) {
        params.sls_directions = 4;
        params.sls_resolution = 64;
        params.travel_points = 8;
        params.travel_seeds = 360;
    }
    const LivshitsReport r = livshits_demo(params);
    if (!o.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(o.out_dir, ec);
        if (ec) throw IoError("cannot create " + o.out_dir + ": " + ec.message());
        const std::filesystem::path dir(o.out_dir);
        const int p = output_precision();
        for (auto variant : {HiddenVariant::Bump, HiddenVariant::Flat}) {
            const Scene s = livshits_scene(params, variant);
            emit((dir / (s.name + ".yaml")).string(), out, [&](std::ostream& os) { os << serialize_scene(s); });
        }
        save_table_csv((dir / "livshits-h1-travel.csv").string(), r.travel_bump, p);
        save_table_csv((dir / "livshits-h2-travel.csv").string(), r.travel_flat, p);
    }
    out << "aperture_rays=" << r.aperture_rays << " hidden_hits_h1=" << r.hidden_hits_bump
        << " hidden_hits_h2=" << r.hidden_hits_flat << "\n";
    out << "returns_between_foci=" << r.returns_between_foci << "/" << r.returns_checked << "\n";
    out << "focal_error=" << format_double(r.focal_error, 6) << " over " << r.focal_rays << " rays\n";
    out << "sls matched_fraction=" << format_double(r.sls.matched_fraction, 6)
        << " travel matched_fraction=" << format_double(r.travel.matched_fraction, 6) << "\n";
    out << "cutoff_h1=" << r.cutoff_bump << " cutoff_h2=" << r.cutoff_flat << "\n";
    out << (r.passed() ? "PASS" : "FAIL") << "\n";
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Billiard scattering laboratory", "scatlab"};
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Parse and validate a scene document");
    validate->add_option("scene", o.scene, "Scene file")->required();

    auto* tr = app.add_subcommand("trace", "Trace one trajectory and list its reflections");
    tr->add_option("scene", o.scene, "Scene file")->required();
    tr->add_option("--from", o.from, "Start point, comma separated")->required();
    tr->add_option("--dir", o.dir, "Initial direction, comma separated")->required();
    tr->add_option("--max-reflections", o.max_reflections, "Reflection cap (default 10000)");
    tr->add_option("--out", o.out, "Event CSV (default: console)");

    auto* sls = app.add_subcommand("sls", "Scan the scattering length spectrum for one direction");
    sls->add_option("scene", o.scene, "Scene file")->required();
    sls->add_option("--omega", o.omega, "Incoming direction, comma separated")->required();
    sls->add_option("--grid", o.grid, "Lattice points per axis")->check(CLI::PositiveNumber);
    sls->add_option("--max-reflections", o.max_reflections, "Reflection cap (default 10000)");
    sls->add_option("--out", o.out, "Output CSV (default: console)");

    auto* travel = app.add_subcommand("travel", "Compute the travelling-time spectrum on S0");
    travel->add_option("scene", o.scene, "Scene file")->required();
    travel->add_option("--points", o.points, "Grid points on S0")->check(CLI::Range(2, 100000));
    travel->add_option("--seeds", o.seeds, "Shooting seeds per source point");
    travel->add_option("--min-separation", o.min_sep, "Skip pairs closer than this angle (degrees)");
    travel->add_option("--max-reflections", o.max_reflections, "Reflection cap (default 10000)");
    travel->add_option("--out", o.out, "Output CSV (default: console)");

    auto* compare = app.add_subcommand("compare", "Compare two spectrum CSVs sampled on the same grid");
    compare->add_option("a", o.table_a, "First table")->required();
    compare->add_option("b", o.table_b, "Second table")->required();
    compare->add_option("--tol", o.tol, "Per-cell Hausdorff tolerance")->check(CLI::NonNegativeNumber);
    compare->add_option("--out", o.out, "Per-cell discrepancy CSV");

    auto* probe = app.add_subcommand("probe-counts", "Compare reflection counts of matching probes in two scenes");
    probe->add_option("a", o.scene, "First scene (supplies the seed)")->required();
    probe->add_option("b", o.scene_b, "Second scene")->required();
    probe->add_option("--probes", o.probes, "Number of probes");
    probe->add_option("--rotate-deg", o.rotate_deg, "Rotate the probes about z for the second scene");
    probe->add_option("--max-reflections", o.max_reflections, "Reflection cap (default 10000)");
    probe->add_option("--out", o.out, "Per-probe CSV");

    auto* coverage = app.add_subcommand("coverage", "Estimate the accessible part of every boundary piece");
    coverage->add_option("scene", o.scene, "Scene file")->required();
    coverage->add_option("--rays", o.rays, "Random rays from S0")->check(CLI::PositiveNumber);
    coverage->add_option("--eps", o.eps, "Coverage radius")->check(CLI::PositiveNumber);
    coverage->add_option("--max-reflections", o.max_reflections, "Reflection cap (default 10000)");
    coverage->add_option("--out", o.out, "Per-piece CSV");

    auto* recon = app.add_subcommand("reconstruct", "Recover reflection points from a travelling-time CSV");
    recon->add_option("table", o.table_a, "Travelling-time CSV")->required();
    recon->add_option("--out", o.out, "Point CSV (default: console)");
    recon->add_option("--truth", o.truth, "Scene file used to report the Hausdorff error");

    auto* demo = app.add_subcommand("demo-livshits", "Run the hidden-wall cavity demonstration");
    demo->add_option("--rays", o.rays, "Aperture rays")->check(CLI::PositiveNumber);
    demo->add_option("--seed", o.seed, "Random seed");
    demo->add_option("--out-dir", o.out_dir, "Directory for scene files and spectra");
    demo->add_flag("--quick", o.quick, "Coarser spectra grids");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (tr->parsed()) return cmd_trace(o, out);
        if (sls->parsed()) return cmd_sls(o, out);
        if (travel->parsed()) return cmd_travel(o, out);
        if (compare->parsed()) return cmd_compare(o, out);
        if (probe->parsed()) return cmd_probe_counts(o, out);
        if (coverage->parsed()) return cmd_coverage(o, out);
        if (recon->parsed()) return cmd_reconstruct(o, out);
        if (demo->parsed()) return cmd_demo_livshits(o, out);
    } catch (const SceneParseError& e) {
        for (const auto& i : e.issues()) {
            err << "error: ";
            if (i.line > 0) err << "line " << i.line << ":" << i.column << ": ";
            if (!i.field.empty()) err << i.field << ": ";
            err << i.message << "\n";
        }
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace scatlab
