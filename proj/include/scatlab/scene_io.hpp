#pragma once
// Scene documents: a strict YAML subset describing the ball O, the convex
// bodies and optional planar curve obstacles.
//
//   metadata: {name: two-disks, seed: 7}
//   dimension: 2
//   ball: {center: [0, 0], radius: 10}
//   bodies:
//     - {kind: ball, center: [-3, 0], radius: 1}
//     - {kind: ellipsoid, center: [3, 0], semiaxes: [2, 1], rotation: [[1, 0], [0, 1]]}
//   curves:
//     - arcs:
//         - {type: segment, from: [0, -1], to: [0, 1], tags: [hidden]}
//         - {type: elliptic-arc, center: [0, 0], semiaxes: [1, 1], angles: [1.5707963267948966, 3.141592653589793]}
//
// Unknown keys are rejected. Numbers are written with 17 significant digits so
// parse(serialize(scene)) reproduces every field bit for bit.

#include "scatlab/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatlab {

struct SceneIssue {
    /// 1-based; 0 when no source position applies (validation findings).
    int line = 0;
    int column = 0;
    std::string field;
    std::string message;
};

class SceneParseError : public std::runtime_error {
public:
    explicit SceneParseError(std::vector<SceneIssue> issues);
    const std::vector<SceneIssue>& issues() const { return issues_; }

private:
    std::vector<SceneIssue> issues_;
};

/// Parses and validates a scene document. Throws SceneParseError listing every
/// syntax error, schema violation or validate_scene finding.
Scene parse_scene(const std::string& text);
Scene load_scene(const std::string& path);

std::string serialize_scene(const Scene& scene);

/// FNV-1a 64 of the serialized document.
std::uint64_t scene_digest(const Scene& scene);

/// "%.17g"-style formatting used by every emitter.
std::string format_double(double value, int precision = 17);

} // namespace scatlab
