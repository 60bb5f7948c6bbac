#include "scatlab/scene_io.hpp"

#include "scatlab/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace scatlab {
namespace {

std::string summarize(const std::vector<SceneIssue>& issues) {
    std::ostringstream os;
    os << issues.size() << " scene error(s)";
    for (const auto& i : issues) {
        os << "\n  ";
        if (i.line > 0) os << "line " << i.line << ":" << i.column << ": ";
        if (!i.field.empty()) os << i.field << ": ";
        os << i.message;
    }
    return os.str();
}

// Walks a parsed document and records every schema problem instead of stopping at the first.
class SchemaReader {
public:
    std::vector<SceneIssue> issues;

    void fail(const YAML::Node& node, const std::string& field, const std::string& message) {
        SceneIssue issue;
        if (node.IsDefined()) {
            const YAML::Mark mark = node.Mark();
            if (mark.line >= 0) {
                issue.line = mark.line + 1;
                issue.column = mark.column + 1;
            }
        }
        issue.field = field;
        issue.message = message;
        issues.push_back(std::move(issue));
    }

    bool expect_map(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
        if (!node.IsMap()) {
            fail(node, field, "expected a mapping");
            return false;
        }
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key)) fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
        }
        return true;
    }

    std::optional<double> number(const YAML::Node& node, const std::string& field) {
        if (!node.IsDefined() || node.IsNull()) {
            fail(node, field, "missing number");
            return std::nullopt;
        }
        try {
            if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
            const double v = node.as<double>();
            if (!std::isfinite(v)) {
                fail(node, field, "number must be finite");
                return std::nullopt;
            }
            return v;
        } catch (const YAML::Exception&) {
            fail(node, field, "expected a number");
            return std::nullopt;
        }
    }

    std::optional<Vec3> vector(const YAML::Node& node, const std::string& field, int dimension) {
        if (!node.IsDefined()) {
            fail(node, field, "missing");
            return std::nullopt;
        }
        if (!node.IsSequence() || node.size() != static_cast<std::size_t>(dimension)) {
            fail(node, field, "expected a list of " + std::to_string(dimension) + " numbers");
            return std::nullopt;
        }
        Vec3 v;
        bool ok = true;
        for (int i = 0; i < dimension; ++i) {
            const auto x = number(node[i], field + "[" + std::to_string(i) + "]");
            ok = ok && x.has_value();
            if (x) v[static_cast<std::size_t>(i)] = *x;
        }
        if (!ok) return std::nullopt;
        return v;
    }

    std::optional<Mat3> matrix(const YAML::Node& node, const std::string& field, int dimension) {
        if (!node.IsSequence() || node.size() != static_cast<std::size_t>(dimension)) {
            fail(node, field, "expected a " + std::to_string(dimension) + "x" + std::to_string(dimension) + " matrix");
            return std::nullopt;
        }
        Mat3 m;
        bool ok = true;
        for (int r = 0; r < dimension; ++r) {
            const auto row = vector(node[r], field + "[" + std::to_string(r) + "]", dimension);
            ok = ok && row.has_value();
            if (row)
                for (int c = 0; c < dimension; ++c)
                    m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = (*row)[static_cast<std::size_t>(c)];
        }
        if (!ok) return std::nullopt;
        return m;
    }
};

std::string quote(const std::string& s) {
    bool plain = !s.empty();
    for (char ch : s) plain = plain && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.');
    if (plain && !std::isdigit(static_cast<unsigned char>(s.front())) && s.front() != '-' && s.front() != '.') return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

std::string list(const Vec3& v, int dimension) {
    std::string out = "[";
    for (int i = 0; i < dimension; ++i) {
        if (i > 0) out += ", ";
        out += format_double(v[static_cast<std::size_t>(i)]);
    }
    return out + "]";
}

} // namespace

SceneParseError::SceneParseError(std::vector<SceneIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

std::string format_double(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    return buf;
}

Scene parse_scene(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw SceneParseError({{e.mark.line + 1, e.mark.column + 1, "", "syntax error: " + e.msg}});
    }

    SchemaReader rd;
    Scene scene;
    if (!rd.expect_map(root, "", {"metadata", "dimension", "ball", "bodies", "curves"})) throw SceneParseError(rd.issues);

    if (const YAML::Node meta = root["metadata"]) {
        if (rd.expect_map(meta, "metadata", {"name", "seed"})) {
            if (meta["name"]) {
                if (meta["name"].IsScalar()) {
                    scene.name = meta["name"].as<std::string>();
                } else {
                    rd.fail(meta["name"], "metadata.name", "expected a string");
                }
            }
            if (const YAML::Node seed = meta["seed"]) {
                try {
                    scene.seed = seed.as<std::uint64_t>();
                } catch (const YAML::Exception&) {
                    rd.fail(seed, "metadata.seed", "expected a non-negative integer");
                }
            }
        }
    }

    int d = 0;
    if (const YAML::Node dim = root["dimension"]) {
        try {
            d = dim.as<int>();
            if (d != 2 && d != 3) rd.fail(dim, "dimension", "must be 2 or 3");
        } catch (const YAML::Exception&) {
            rd.fail(dim, "dimension", "expected an integer");
        }
    } else {
        rd.fail(root, "dimension", "missing required key");
    }
    if (d != 2 && d != 3) throw SceneParseError(rd.issues);
    scene.dimension = d;

    if (const YAML::Node ball = root["ball"]) {
        if (rd.expect_map(ball, "ball", {"center", "radius"})) {
            if (auto c = rd.vector(ball["center"], "ball.center", d)) scene.ball_center = *c;
            if (auto r = rd.number(ball["radius"], "ball.radius")) {
                if (*r > 0.0) {
                    scene.ball_radius = *r;
                } else {
                    rd.fail(ball["radius"], "ball.radius", "must be positive");
                }
            }
        }
    } else {
        rd.fail(root, "ball", "missing required key");
    }

    std::vector<YAML::Node> body_nodes;
    if (const YAML::Node bodies = root["bodies"]) {
        if (!bodies.IsSequence()) {
            rd.fail(bodies, "bodies", "expected a list");
        } else {
            for (std::size_t i = 0; i < bodies.size(); ++i) {
                const YAML::Node b = bodies[i];
                const std::string f = "bodies[" + std::to_string(i) + "]";
                body_nodes.push_back(b);
                if (!b.IsMap()) {
                    rd.fail(b, f, "expected a mapping");
                    continue;
                }
                const std::string kind = b["kind"] && b["kind"].IsScalar() ? b["kind"].as<std::string>() : "";
                if (kind == "ball") {
                    if (!rd.expect_map(b, f, {"kind", "center", "radius"})) continue;
                    const auto c = rd.vector(b["center"], f + ".center", d);
                    const auto r = rd.number(b["radius"], f + ".radius");
                    if (!c || !r) continue;
                    try {
                        scene.bodies.push_back(ConvexBody::ball(*c, *r));
                    } catch (const ContractError& e) {
                        rd.fail(b["radius"], f + ".radius", e.what());
                    }
                } else if (kind == "ellipsoid") {
                    if (!rd.expect_map(b, f, {"kind", "center", "semiaxes", "rotation"})) continue;
                    const auto c = rd.vector(b["center"], f + ".center", d);
                    auto s = rd.vector(b["semiaxes"], f + ".semiaxes", d);
                    std::optional<Mat3> rot = Mat3::identity();
                    if (b["rotation"]) rot = rd.matrix(b["rotation"], f + ".rotation", d);
                    if (!c || !s || !rot) continue;
                    if (d == 2) s->z = 1.0;
                    try {
                        scene.bodies.push_back(ConvexBody::ellipsoid(*c, *s, *rot));
                    } catch (const ContractError& e) {
                        rd.fail(b, f, e.what());
                    }
                } else {
                    rd.fail(b["kind"] ? b["kind"] : b, f + ".kind", "expected 'ball' or 'ellipsoid'");
                }
            }
        }
    }

    if (const YAML::Node curves = root["curves"]) {
        if (!curves.IsSequence()) {
            rd.fail(curves, "curves", "expected a list");
        } else {
            for (std::size_t ci = 0; ci < curves.size(); ++ci) {
                const YAML::Node cn = curves[ci];
                const std::string f = "curves[" + std::to_string(ci) + "]";
                if (!rd.expect_map(cn, f, {"arcs"})) continue;
                const YAML::Node arcs = cn["arcs"];
                if (!arcs || !arcs.IsSequence()) {
                    rd.fail(arcs ? arcs : cn, f + ".arcs", "expected a list of arcs");
                    continue;
                }
                std::vector<ArcPiece> pieces;
                bool ok = true;
                for (std::size_t k = 0; k < arcs.size(); ++k) {
                    const YAML::Node an = arcs[k];
                    const std::string af = f + ".arcs[" + std::to_string(k) + "]";
                    if (!an.IsMap()) {
                        rd.fail(an, af, "expected a mapping");
                        ok = false;
                        continue;
                    }
                    const std::string type = an["type"] && an["type"].IsScalar() ? an["type"].as<std::string>() : "";
                    ArcPiece piece;
                    if (type == "segment") {
                        if (!rd.expect_map(an, af, {"type", "from", "to", "tags"})) { ok = false; continue; }
                        const auto from = rd.vector(an["from"], af + ".from", 2);
                        const auto to = rd.vector(an["to"], af + ".to", 2);
                        if (!from || !to) { ok = false; continue; }
                        piece.shape = Segment{*from, *to};
                    } else if (type == "elliptic-arc") {
                        if (!rd.expect_map(an, af, {"type", "center", "semiaxes", "angles", "tags"})) { ok = false; continue; }
                        const auto c = rd.vector(an["center"], af + ".center", 2);
                        const auto s = rd.vector(an["semiaxes"], af + ".semiaxes", 2);
                        const auto ang = rd.vector(an["angles"], af + ".angles", 2);
                        if (!c || !s || !ang) { ok = false; continue; }
                        piece.shape = EllipticArc{*c, s->x, s->y, ang->x, ang->y};
                    } else {
                        rd.fail(an["type"] ? an["type"] : an, af + ".type", "expected 'segment' or 'elliptic-arc'");
                        ok = false;
                        continue;
                    }
                    if (const YAML::Node tags = an["tags"]) {
                        if (!tags.IsSequence()) {
                            rd.fail(tags, af + ".tags", "expected a list of strings");
                        } else {
                            for (const auto& t : tags) piece.tags.push_back(t.as<std::string>());
                        }
                    }
                    pieces.push_back(std::move(piece));
                }
                if (!ok) continue;
                try {
                    scene.curves.emplace_back(std::move(pieces));
                } catch (const ContractError& e) {
                    rd.fail(cn, f, e.what());
                }
            }
        }
    }

    if (!rd.issues.empty()) throw SceneParseError(rd.issues);

    const ValidationReport report = validate_scene(scene);
    if (!report.admissible()) {
        for (const auto& v : report.violations) {
            YAML::Node where;
            std::string field = "scene";
            if (!v.obstacles.empty() && v.obstacles.front() < body_nodes.size()) {
                where = body_nodes[v.obstacles.front()];
                field = "bodies[" + std::to_string(v.obstacles.front()) + "]";
            }
            rd.fail(where, field, "validation: " + v.message);
        }
        throw SceneParseError(rd.issues);
    }
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str());
}

std::string serialize_scene(const Scene& scene) {
    const int d = scene.dimension;
    std::ostringstream os;
    os << "metadata:\n";
    os << "  name: " << quote(scene.name) << "\n";
    if (scene.seed) os << "  seed: " << *scene.seed << "\n";
    os << "dimension: " << d << "\n";
    os << "ball:\n";
    os << "  center: " << list(scene.ball_center, d) << "\n";
    os << "  radius: " << format_double(scene.ball_radius) << "\n";
    if (scene.bodies.empty()) {
        os << "bodies: []\n";
    } else {
        os << "bodies:\n";
        for (const auto& b : scene.bodies) {
            if (b.kind() == BodyKind::Ball) {
                os << "  - kind: ball\n";
                os << "    center: " << list(b.center(), d) << "\n";
                os << "    radius: " << format_double(b.semiaxes().x) << "\n";
            } else {
                os << "  - kind: ellipsoid\n";
                os << "    center: " << list(b.center(), d) << "\n";
                os << "    semiaxes: " << list(b.semiaxes(), d) << "\n";
                os << "    rotation: [";
                for (int r = 0; r < d; ++r) {
                    if (r > 0) os << ", ";
                    const Mat3& m = b.rotation();
                    os << list({m(static_cast<std::size_t>(r), 0), m(static_cast<std::size_t>(r), 1),
                                m(static_cast<std::size_t>(r), 2)},
                               d);
                }
                os << "]\n";
            }
        }
    }
    if (!scene.curves.empty()) {
        os << "curves:\n";
        for (const auto& c : scene.curves) {
            os << "  - arcs:\n";
            for (const auto& piece : c.arcs()) {
                if (const auto* arc = std::get_if<EllipticArc>(&piece.shape)) {
                    os << "      - type: elliptic-arc\n";
                    os << "        center: " << list(arc->center, 2) << "\n";
                    os << "        semiaxes: " << list({arc->semi_x, arc->semi_y, 0}, 2) << "\n";
                    os << "        angles: " << list({arc->angle_begin, arc->angle_end, 0}, 2) << "\n";
                } else {
                    const auto& seg = std::get<Segment>(piece.shape);
                    os << "      - type: segment\n";
                    os << "        from: " << list(seg.from, 2) << "\n";
                    os << "        to: " << list(seg.to, 2) << "\n";
                }
                if (!piece.tags.empty()) {
                    os << "        tags: [";
                    for (std::size_t i = 0; i < piece.tags.size(); ++i) os << (i ? ", " : "") << quote(piece.tags[i]);
                    os << "]\n";
                }
            }
        }
    }
    return os.str();
}

std::uint64_t scene_digest(const Scene& scene) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_scene(scene)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace scatlab
