#include "scatlab/table_io.hpp"

#include "scatlab/errors.hpp"
#include "scatlab/scene_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace scatlab {
namespace {

std::string vec_field(const Vec3& v, int d, int precision, char sep) {
    std::string out;
    for (int i = 0; i < d; ++i) {
        if (i > 0) out += sep;
        out += format_double(v[static_cast<std::size_t>(i)], precision);
    }
    return out;
}

std::string columns(const std::string& name, int count) {
    std::string out;
    for (int i = 1; i <= count; ++i) out += (i > 1 ? "," : "") + name + "_" + std::to_string(i);
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("malformed number '" + s + "' in CSV");
    return v;
}

std::uint64_t to_uint(const std::string& s, int base = 10) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("malformed integer '" + s + "' in CSV");
    return v;
}

Vec3 to_vec(const std::vector<std::string>& parts, std::size_t first, int d) {
    Vec3 v;
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = to_double(parts.at(first + static_cast<std::size_t>(i)));
    return v;
}

std::vector<std::size_t> to_itinerary(const std::string& s) {
    std::vector<std::size_t> out;
    if (s.empty()) return out;
    for (const auto& part : split(s, '-')) out.push_back(static_cast<std::size_t>(to_uint(part)));
    return out;
}

} // namespace

int output_precision() {
    if (const char* env = std::getenv("SCATLAB_PRECISION")) {
        const int p = std::atoi(env);
        if (p >= 1 && p <= 17) return p;
        throw ContractError("SCATLAB_PRECISION must be an integer in 1..17");
    }
    return 17;
}

std::string join_itinerary(const std::vector<std::size_t>& itinerary) {
    std::string out;
    for (std::size_t i = 0; i < itinerary.size(); ++i) out += (i ? "-" : "") + std::to_string(itinerary[i]);
    return out;
}

void write_table_csv(std::ostream& out, const SpectrumTable& table, int precision) {
    const GridSpec& g = table.grid;
    const int d = g.dimension;
    const int p = 17; // grid parameters always round-trip exactly
    out << "# scatlab kind=" << (g.kind == SpectrumKind::Sls ? "sls" : "travel") << " dimension=" << d
        << " center=" << vec_field(g.ball_center, d, p, ';') << " radius=" << format_double(g.ball_radius, p)
        << " omega=" << vec_field(g.omega, d, p, ';') << " resolution=" << g.resolution
        << " min_separation_deg=" << format_double(g.min_separation_deg, p) << " seeds=" << g.seeds
        << " tol=" << format_double(g.tol, p) << " dedup=" << format_double(g.dedup, p)
        << " max_reflections=" << g.max_reflections << " precision=" << precision << " cutoff="
        << table.diagnostics.cutoff << " dropped=" << table.diagnostics.dropped_clusters
        << " grazing=" << table.diagnostics.grazing;
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(table.scene_digest));
    out << " digest=" << digest << "\n";

    if (g.kind == SpectrumKind::Sls) {
        out << columns("omega", d) << "," << columns("impact", d - 1) << "," << columns("theta", d)
            << ",T,reflections,grazing,itinerary\n";
        for (const auto& s : table.sls) {
            out << vec_field(s.omega, d, precision, ',');
            for (int i = 0; i < d - 1; ++i) out << "," << format_double(s.impact[static_cast<std::size_t>(i)], precision);
            out << "," << vec_field(s.theta, d, precision, ',') << "," << format_double(s.sojourn, precision) << ","
                << s.reflections << "," << (s.grazing ? 1 : 0) << "," << join_itinerary(s.itinerary) << "\n";
        }
    } else {
        out << columns("x", d) << "," << columns("y", d) << ",t,reflections,residual,itinerary," << columns("din", d)
            << "," << columns("dout", d) << "\n";
        for (const auto& s : table.travel) {
            out << vec_field(s.x, d, precision, ',') << "," << vec_field(s.y, d, precision, ',') << ","
                << format_double(s.t, precision) << "," << s.reflections << "," << format_double(s.residual, precision)
                << "," << join_itinerary(s.itinerary) << "," << vec_field(s.dir_in, d, precision, ',') << ","
                << vec_field(s.dir_out, d, precision, ',') << "\n";
        }
    }
}

SpectrumTable read_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# scatlab ", 0) != 0)
        throw IoError("spectrum CSV must start with a '# scatlab' grid line");
    std::map<std::string, std::string> kv;
    std::istringstream tokens(line.substr(10));
    for (std::string tok; tokens >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw IoError("malformed grid token '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto get = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw IoError("grid line lacks '" + key + "'");
        return it->second;
    };

    SpectrumTable table;
    GridSpec& g = table.grid;
    const std::string kind = get("kind");
    if (kind != "sls" && kind != "travel") throw IoError("unknown spectrum kind '" + kind + "'");
    g.kind = kind == "sls" ? SpectrumKind::Sls : SpectrumKind::Travel;
    g.dimension = static_cast<int>(to_uint(get("dimension")));
    if (g.dimension != 2 && g.dimension != 3) throw IoError("grid dimension must be 2 or 3");
    const int d = g.dimension;
    g.ball_center = to_vec(split(get("center"), ';'), 0, d);
    g.ball_radius = to_double(get("radius"));
    g.omega = to_vec(split(get("omega"), ';'), 0, d);
    g.resolution = static_cast<std::size_t>(to_uint(get("resolution")));
    g.min_separation_deg = to_double(get("min_separation_deg"));
    g.seeds = static_cast<std::size_t>(to_uint(get("seeds")));
    g.tol = to_double(get("tol"));
    g.dedup = to_double(get("dedup"));
    g.max_reflections = static_cast<std::size_t>(to_uint(get("max_reflections")));
    const int precision = static_cast<int>(to_uint(get("precision")));
    table.diagnostics.cutoff = static_cast<std::size_t>(to_uint(get("cutoff")));
    table.diagnostics.dropped_clusters = static_cast<std::size_t>(to_uint(get("dropped")));
    table.diagnostics.grazing = static_cast<std::size_t>(to_uint(get("grazing")));
    table.scene_digest = to_uint(get("digest"), 16);

    if (!std::getline(in, line)) throw IoError("spectrum CSV lacks a header row");

    // Cell lookup keyed by the grid coordinates as printed.
    std::map<std::string, std::size_t> cell_of;
    if (g.kind == SpectrumKind::Sls) {
        for (const auto& lp : sls_lattice(g)) {
            std::string key;
            for (int i = 0; i < d - 1; ++i)
                key += format_double(lp.impact[static_cast<std::size_t>(i)], precision) + ",";
            cell_of[key] = lp.cell;
        }
    } else {
        const auto pts = travel_points(g);
        const auto pairs = travel_pairs(g);
        for (std::size_t c = 0; c < pairs.size(); ++c)
            cell_of[vec_field(pts[pairs[c][0]], d, precision, ',') + "," + vec_field(pts[pairs[c][1]], d, precision, ',')] = c;
    }

    const std::size_t expected = g.kind == SpectrumKind::Sls ? static_cast<std::size_t>(3 * d + 3)
                                                              : static_cast<std::size_t>(4 * d + 4);
    std::size_t row = 2;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != expected)
            throw IoError("CSV row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields, expected " +
                          std::to_string(expected));
        if (g.kind == SpectrumKind::Sls) {
            SlsSample s;
            const auto ud = static_cast<std::size_t>(d);
            s.omega = to_vec(f, 0, d);
            std::string key;
            for (std::size_t i = 0; i + 1 < ud; ++i) {
                s.impact[i] = to_double(f[ud + i]);
                key += f[ud + i] + ",";
            }
            s.theta = to_vec(f, 2 * ud - 1, d);
            s.sojourn = to_double(f[3 * ud - 1]);
            s.reflections = static_cast<std::size_t>(to_uint(f[3 * ud]));
            s.grazing = f[3 * ud + 1] == "1";
            s.itinerary = to_itinerary(f[3 * ud + 2]);
            const auto it = cell_of.find(key);
            if (it == cell_of.end()) throw IoError("CSV row " + std::to_string(row) + " is not on the lattice");
            s.cell = it->second;
            table.sls.push_back(std::move(s));
        } else {
            TravelSample s;
            const auto ud = static_cast<std::size_t>(d);
            s.x = to_vec(f, 0, d);
            s.y = to_vec(f, ud, d);
            s.t = to_double(f[2 * ud]);
            s.reflections = static_cast<std::size_t>(to_uint(f[2 * ud + 1]));
            s.residual = to_double(f[2 * ud + 2]);
            s.itinerary = to_itinerary(f[2 * ud + 3]);
            s.dir_in = to_vec(f, 2 * ud + 4, d);
            s.dir_out = to_vec(f, 3 * ud + 4, d);
            std::string key;
            for (std::size_t i = 0; i < 2 * ud; ++i) key += (i ? "," : "") + f[i];
            const auto it = cell_of.find(key);
            if (it == cell_of.end()) throw IoError("CSV row " + std::to_string(row) + " is not a grid pair");
            s.cell = it->second;
            table.travel.push_back(std::move(s));
        }
    }
    return table;
}

SpectrumTable load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_table_csv(in);
}

void save_table_csv(const std::string& path, const SpectrumTable& table, int precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_table_csv(out, table, precision);
    if (!out) throw IoError("write failed for " + path);
}

void write_reconstruction_csv(std::ostream& out, const BoundaryEstimate& estimate, int dimension, int precision) {
    out << columns("p", dimension) << "," << columns("source_x", dimension) << "," << columns("source_y", dimension)
        << ",t\n";
    for (const auto& e : estimate.points)
        out << vec_field(e.point, dimension, precision, ',') << "," << vec_field(e.x, dimension, precision, ',') << ","
            << vec_field(e.y, dimension, precision, ',') << "," << format_double(e.t, precision) << "\n";
}

void write_discrepancy_csv(std::ostream& out, const DiscrepancyReport& report, int precision) {
    out << "cell,hausdorff,mismatch\n";
    for (std::size_t c = 0; c < report.per_cell.size(); ++c) {
        const double h = report.per_cell[c];
        out << c << "," << (std::isinf(h) ? std::string("inf") : format_double(h, precision)) << ","
            << (h > report.tol ? 1 : 0) << "\n";
    }
}

} // namespace scatlab
