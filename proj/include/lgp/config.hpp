#pragma once

// Run configuration: a small key = value format with nested named blocks.
//
//   geometry {
//     outer {
//       shape = circle
//       radius = 2
//     }
//   }
//
// '#' starts a comment. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lgp/boundary_data.hpp"
#include "lgp/geometry.hpp"
#include "lgp/transport.hpp"

namespace lgp {

struct ConfigNode {
  std::map<std::string, std::string> values;
  std::map<std::string, ConfigNode> children;
  std::map<std::string, int> lines;  // line of each key or block
};

// Throws Error(config) with a line number on malformed input.
ConfigNode parse_config_text(std::string_view text);

struct CurveSpec {
  std::string shape = "circle";  // circle | ellipse | polygon
  Vec2 center;
  double radius = 1.0;
  double semi_x = 1.0;
  double semi_y = 1.0;
  double rotation = 0.0;
  std::size_t vertices = 4800;
  std::vector<Vec2> points;
};

struct DataSpec {
  std::string kind = "constant";  // constant | linear | table
  double value = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double b = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::vector<Breakpoint> table;
  std::vector<Jump> jumps;
};

enum class Stage { check, solve, density, reconstruct, all };

struct RunConfig {
  std::string name = "run";
  CurveSpec outer_curve;
  CurveSpec inner_curve;
  DataSpec outer_data;
  DataSpec inner_data;
  double shift = 0.0;  // added to the anchored trace on both components
  std::size_t atoms = 256;
  CostNorm norm;
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
  double h = 0.02;
  std::string out_dir = "out";
};

RunConfig config_from_node(const ConfigNode& root);
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

CostNorm parse_norm(const std::string& text);

Annulus build_annulus(const RunConfig& cfg);
BoundaryFunction build_data(const RunConfig& cfg, const Annulus& annulus);

}  // namespace lgp
