#include "lgp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lgp/error.hpp"

namespace lgp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(ErrorCode::config, (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + what);
}

int line_of(const ConfigNode& node, const std::string& key) {
  const auto it = node.lines.find(key);
  return it == node.lines.end() ? 0 : it->second;
}

void allow(const ConfigNode& node, const std::string& where, std::set<std::string> keys, std::set<std::string> blocks) {
  for (const auto& [k, v] : node.values) {
    if (!keys.count(k)) fail(line_of(node, k), "unknown key '" + k + "' in " + where);
  }
  for (const auto& [k, v] : node.children) {
    if (!blocks.count(k)) fail(line_of(node, k), "unknown block '" + k + "' in " + where);
  }
}

const ConfigNode& block(const ConfigNode& node, const std::string& name, const std::string& where) {
  const auto it = node.children.find(name);
  if (it == node.children.end()) fail(0, "missing block '" + name + "' in " + where);
  return it->second;
}

std::vector<double> numbers(const ConfigNode& node, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(node.values.at(key));
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      fail(line_of(node, key), "'" + key + "' expects numbers, got '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

double number(const ConfigNode& node, const std::string& key, double fallback) {
  if (!node.values.count(key)) return fallback;
  const auto v = numbers(node, key);
  if (v.size() != 1) fail(line_of(node, key), "'" + key + "' expects one number");
  return v.front();
}

std::size_t count(const ConfigNode& node, const std::string& key, std::size_t fallback) {
  const double v = number(node, key, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v)) fail(line_of(node, key), "'" + key + "' expects a nonnegative integer");
  return static_cast<std::size_t>(v);
}

Vec2 point(const ConfigNode& node, const std::string& key, Vec2 fallback) {
  if (!node.values.count(key)) return fallback;
  const auto v = numbers(node, key);
  if (v.size() != 2) fail(line_of(node, key), "'" + key + "' expects two numbers");
  return {v[0], v[1]};
}

CurveSpec curve_spec(const ConfigNode& node, const std::string& where) {
  allow(node, where, {"shape", "center", "radius", "semi_x", "semi_y", "rotation_deg", "vertices", "points"}, {});
  CurveSpec c;
  if (node.values.count("shape")) c.shape = node.values.at("shape");
  c.center = point(node, "center", {0.0, 0.0});
  c.radius = number(node, "radius", 1.0);
  c.semi_x = number(node, "semi_x", 1.0);
  c.semi_y = number(node, "semi_y", 1.0);
  c.rotation = number(node, "rotation_deg", 0.0) * std::acos(-1.0) / 180.0;
  c.vertices = count(node, "vertices", 4800);
  if (c.shape == "polygon") {
    if (!node.values.count("points")) fail(0, where + ": polygon needs 'points'");
    const auto v = numbers(node, "points");
    if (v.size() % 2 != 0) fail(line_of(node, "points"), "'points' expects x y pairs");
    for (std::size_t i = 0; i < v.size(); i += 2) c.points.push_back({v[i], v[i + 1]});
  } else if (c.shape != "circle" && c.shape != "ellipse") {
    fail(line_of(node, "shape"), "unknown shape '" + c.shape + "'");
  }
  return c;
}

DataSpec data_spec(const ConfigNode& node, const std::string& where) {
  allow(node, where, {"kind", "value", "ax", "ay", "b", "clamp", "points", "jumps"}, {});
  DataSpec d;
  if (node.values.count("kind")) d.kind = node.values.at("kind");
  d.value = number(node, "value", 0.0);
  d.ax = number(node, "ax", 0.0);
  d.ay = number(node, "ay", 0.0);
  d.b = number(node, "b", 0.0);
  if (node.values.count("clamp")) {
    const auto v = numbers(node, "clamp");
    if (v.size() != 2 || v[0] > v[1]) fail(line_of(node, "clamp"), "'clamp' expects lo hi with lo <= hi");
    d.lo = v[0];
    d.hi = v[1];
  }
  if (d.kind == "table") {
    if (!node.values.count("points")) fail(0, where + ": table data needs 'points'");
    const auto v = numbers(node, "points");
    if (v.size() % 2 != 0 || v.size() < 4) fail(line_of(node, "points"), "'points' expects at least two t value pairs");
    for (std::size_t i = 0; i < v.size(); i += 2) d.table.push_back({v[i], v[i + 1]});
    if (node.values.count("jumps")) {
      const auto j = numbers(node, "jumps");
      if (j.size() % 2 != 0) fail(line_of(node, "jumps"), "'jumps' expects t height pairs");
      for (std::size_t i = 0; i < j.size(); i += 2) d.jumps.push_back({j[i], j[i + 1]});
    }
  } else if (d.kind != "constant" && d.kind != "linear") {
    fail(line_of(node, "kind"), "unknown data kind '" + d.kind + "'");
  }
  return d;
}

ConvexBoundary build_curve(const CurveSpec& c, Side side) {
  if (c.shape == "circle") return ConvexBoundary::circle(c.center, c.radius, c.vertices, side);
  if (c.shape == "ellipse") return ConvexBoundary::ellipse(c.center, c.semi_x, c.semi_y, c.rotation, c.vertices, side);
  return ConvexBoundary(c.points, side);
}

ComponentFunction build_component(const DataSpec& d, const ConvexBoundary& curve) {
  if (d.kind == "constant") return sample_constant(curve, d.value);
  if (d.kind == "linear") return sample_linear_clamped(curve, d.ax, d.ay, d.b, d.lo, d.hi);
  // Table positions are fractions of the perimeter.
  const double P = curve.perimeter();
  std::vector<Breakpoint> bps;
  for (const auto& b : d.table) bps.push_back({b.s * P, b.value});
  std::vector<Jump> jumps;
  for (const auto& j : d.jumps) jumps.push_back({j.s * P, j.height});
  return ComponentFunction(P, std::move(bps), std::move(jumps));
}

}  // namespace

ConfigNode parse_config_text(std::string_view text) {
  ConfigNode root;
  std::vector<ConfigNode*> stack{&root};
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    ConfigNode& top = *stack.back();
    if (line == "}") {
      if (stack.size() == 1) fail(line_no, "unmatched '}'");
      stack.pop_back();
    } else if (line.back() == '{') {
      const std::string name = trim(std::string_view(line).substr(0, line.size() - 1));
      if (!is_identifier(name)) fail(line_no, "bad block name '" + name + "'");
      if (top.children.count(name)) fail(line_no, "duplicate block '" + name + "'");
      top.lines[name] = line_no;
      stack.push_back(&top.children[name]);
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value', '<name> {' or '}'");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (!is_identifier(key)) fail(line_no, "bad key '" + key + "'");
      if (value.empty()) fail(line_no, "empty value for '" + key + "'");
      if (top.values.count(key)) fail(line_no, "duplicate key '" + key + "'");
      top.values[key] = value;
      top.lines[key] = line_no;
    }
  }
  if (stack.size() != 1) fail(line_no, "unterminated block");
  return root;
}

CostNorm parse_norm(const std::string& text) {
  if (text == "euclidean" || text == "2") return CostNorm::euclidean();
  double p = 0.0;
  const std::string digits = !text.empty() && (text[0] == 'l' || text[0] == 'p') ? text.substr(1) : text;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || !(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::config, "norm must be 'euclidean' or an exponent p in (1, inf), got '" + text + "'");
  }
  return p == 2.0 ? CostNorm::euclidean() : CostNorm::p_norm(p);
}

RunConfig config_from_node(const ConfigNode& root) {
  allow(root, "the top level", {"name"}, {"geometry", "data", "solver", "grid", "output"});
  RunConfig cfg;
  if (root.values.count("name")) cfg.name = root.values.at("name");

  const ConfigNode& geometry = block(root, "geometry", "the top level");
  allow(geometry, "geometry", {}, {"outer", "inner"});
  cfg.outer_curve = curve_spec(block(geometry, "outer", "geometry"), "geometry.outer");
  cfg.inner_curve = curve_spec(block(geometry, "inner", "geometry"), "geometry.inner");

  const ConfigNode& data = block(root, "data", "the top level");
  allow(data, "data", {"shift"}, {"outer", "inner"});
  cfg.outer_data = data_spec(block(data, "outer", "data"), "data.outer");
  cfg.inner_data = data_spec(block(data, "inner", "data"), "data.inner");
  cfg.shift = number(data, "shift", 0.0);

  if (root.children.count("solver")) {
    const ConfigNode& s = root.children.at("solver");
    allow(s, "solver", {"atoms", "norm", "seed", "trials"}, {});
    cfg.atoms = count(s, "atoms", cfg.atoms);
    if (s.values.count("norm")) cfg.norm = parse_norm(s.values.at("norm"));
    cfg.seed = count(s, "seed", 0);
    cfg.trials = count(s, "trials", cfg.trials);
  }
  if (root.children.count("grid")) {
    const ConfigNode& g = root.children.at("grid");
    allow(g, "grid", {"h"}, {});
    cfg.h = number(g, "h", cfg.h);
  }
  if (root.children.count("output")) {
    const ConfigNode& o = root.children.at("output");
    allow(o, "output", {"dir"}, {});
    if (o.values.count("dir")) cfg.out_dir = o.values.at("dir");
  }
  if (cfg.atoms < 2) fail(0, "solver.atoms must be at least 2");
  if (!(cfg.h > 0.0)) fail(0, "grid.h must be positive");
  return cfg;
}

RunConfig parse_config(std::string_view text) { return config_from_node(parse_config_text(text)); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Annulus build_annulus(const RunConfig& cfg) {
  return Annulus(build_curve(cfg.outer_curve, Side::outer), build_curve(cfg.inner_curve, Side::inner));
}

BoundaryFunction build_data(const RunConfig& cfg, const Annulus& annulus) {
  return BoundaryFunction(build_component(cfg.outer_data, annulus.outer()),
                          build_component(cfg.inner_data, annulus.inner()));
}

}  // namespace lgp
