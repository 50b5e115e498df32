#include "lgp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lgp/error.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void certify(PipelineResult& r, std::string name, double value, double limit, bool gating = true) {
  r.certificates.push_back({std::move(name), value, limit, value <= limit, gating});
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool stage_at_least(Stage s, Stage want) { return static_cast<int>(s) >= static_cast<int>(want); }

void solve_stages(PipelineResult& r) {
  const RunConfig& cfg = r.config;
  const Annulus& annulus = *r.annulus;
  const AdmissibilityReport& adm = r.admissibility;
  const Pairing* pairing = adm.pairing ? &*adm.pairing : nullptr;

  r.measure = tangential_derivative(*r.data);
  const BoundaryMeasure& f = *r.measure;

  // Anchored trace; the input data stand in when no anchor exists.
  r.trace = *r.data;
  if (pairing || f.is_zero()) {
    try {
      r.trace = anchor_trace(f, adm.outer_decomposition, adm.inner_decomposition,
                             pairing ? pairing->outer_anchor : 0, pairing ? pairing->inner_anchor : 0);
      r.trace_anchored = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::missing_anchor && e.code() != ErrorCode::mass_mismatch) throw;
      r.warnings.push_back(std::string("trace not anchored (") + e.what() + "); using the input data");
    }
  } else {
    r.warnings.push_back("trace not anchored (no arc pairing); using the input data");
  }
  if (cfg.shift != 0.0) r.trace = r.trace->shifted(cfg.shift);

  Atomization atoms = atomize(annulus, f, cfg.atoms);
  r.plan = solve(std::move(atoms.sources), std::move(atoms.sinks), cfg.norm);
  const TransportPlan& plan = *r.plan;
  r.warnings.insert(r.warnings.end(), plan.warnings.begin(), plan.warnings.end());
  r.metrics["plan.cost"] = plan.cost;
  r.metrics["plan.pairs"] = static_cast<double>(plan.pairs.size());
  r.metrics["plan.sources"] = static_cast<double>(plan.sources.atoms.size());
  r.metrics["plan.sinks"] = static_cast<double>(plan.sinks.atoms.size());
  r.metrics["plan.pivots"] = static_cast<double>(plan.pivots);
  r.metrics["plan.split_sources"] = static_cast<double>(split_sources(plan));
  r.metrics["plan.eps_dual"] = plan.eps_dual;

  certify(r, "marginal residual (relative)", marginal_residual(plan), 1e-12);
  certify(r, "duality gap (relative)", duality_gap(plan), 1e-8);
  certify(r, "support equality residual", check_support_equality(plan), plan.eps_dual);
  certify(r, "1-Lipschitz violation", std::max(0.0, lipschitz_violation(plan)), plan.eps_dual);
  certify(r, "cyclical monotonicity violations",
          static_cast<double>(check_cyclical_monotonicity(plan, cfg.trials, cfg.seed)), 0.0);
  certify(r, "ray crossings", static_cast<double>(check_rays_noncrossing(plan)), 0.0);
  const RayReport rays = check_rays_inside(plan, annulus, pairing);
  // Rays are only guaranteed inside for admissible data.
  certify(r, "rays outside the annulus or mistyped", static_cast<double>(rays.violations.size()), 0.0,
          adm.overall() != Verdict::fail);
  for (std::size_t k = 0; k < std::min<std::size_t>(rays.violations.size(), 5); ++k) {
    const auto& v = rays.violations[k];
    const auto& p = plan.pairs[v.pair];
    std::ostringstream os;
    os << "ray " << v.pair << " (" << short_num(plan.from(p).x) << ", " << short_num(plan.from(p).y) << ") -> ("
       << short_num(plan.to(p).x) << ", " << short_num(plan.to(p).y) << "): " << v.reason;
    r.warnings.push_back(os.str());
  }

  if (!stage_at_least(r.options.stage, Stage::density)) return;
  r.grid = std::make_unique<Grid>(annulus, cfg.h, std::max(0.1, 4.0 * cfg.h));
  const Grid& grid = *r.grid;
  r.raster = rasterize(plan, grid);
  const Rasterization& ras = *r.raster;
  const double sigma_total = ras.sigma.total();
  certify(r, "sigma mass vs plan cost (relative)",
          plan.cost > 0.0 ? std::fabs(sigma_total - plan.cost) / plan.cost : std::fabs(sigma_total), 1e-9);
  const ScalarField sigma{ras.sigma.density(grid.h())};
  const double sigma_max = lp_norm(sigma, grid, kInf, Region::all);
  certify(r, "max(|w| - sigma) per cell (cost norm)", std::max(0.0, flow_excess(ras, grid, plan.norm)),
          1e-12 * (1.0 + sigma_max));
  r.phi = potential_field(plan, grid);
  r.metrics["density.alignment_residual"] = check_flow_potential_alignment(ras, *r.phi, grid);
  r.divergence = check_divergence(ras, plan, grid, annulus, cfg.atoms);
  double worst_ratio = 0.0;
  for (const auto& d : r.divergence) worst_ratio = std::max(worst_ratio, d.tolerance > 0.0 ? d.residual / d.tolerance : 0.0);
  certify(r, "weak divergence residual / tolerance (worst test function)", worst_ratio, 1.0);
  r.metrics["density.sigma_mass"] = sigma_total;
  r.metrics["density.sigma_L1"] = lp_norm(sigma, grid, 1.0);
  r.metrics["density.sigma_L2"] = lp_norm(sigma, grid, 2.0);
  r.metrics["density.sigma_Linf"] = lp_norm(sigma, grid, kInf);
  const double f_inf = std::max(f.outer.sup_density(), f.inner.sup_density());
  if (f_inf > 0.0) r.metrics["density.sigma_Linf_over_f_Linf"] = lp_norm(sigma, grid, kInf) / f_inf;
  r.metrics["density.boundary_mass_2h"] = boundary_mass(ras.sigma, grid, 2.0 * grid.h());
  r.metrics["density.boundary_mass_4h"] = boundary_mass(ras.sigma, grid, 4.0 * grid.h());

  if (!stage_at_least(r.options.stage, Stage::reconstruct)) return;
  r.solution = reconstruct_u(plan, annulus, grid, *r.trace, pairing, adm.outer_decomposition, adm.inner_decomposition);
  const ReconstructedSolution& sol = *r.solution;
  r.recovered_trace = extract_trace(sol.u, annulus, grid);
  r.metrics["recovery.trace_L1_outer"] = l1_distance(r.recovered_trace->outer(), r.trace->outer(), annulus.outer());
  r.metrics["recovery.trace_L1_inner"] = l1_distance(r.recovered_trace->inner(), r.trace->inner(), annulus.inner());
  r.metrics["recovery.swept_cells"] = static_cast<double>(sol.swept_cells);
  r.metrics["recovery.extended_cells"] = static_cast<double>(sol.extended_cells);

  double max_atom = 0.0;
  for (const auto* m : {&plan.sources, &plan.sinks}) {
    for (const auto& a : m->atoms) max_atom = std::max(max_atom, a.mass);
  }
  const double tv = r.trace->outer().total_variation() + r.trace->inner().total_variation();
  certify(r, "ray constancy (max spread of u along a ray)", ray_constancy(sol.u, plan, grid),
          2.0 * max_atom + 1e-9 * (1.0 + tv));
  const double lo = std::min(r.trace->outer().min_value(), r.trace->inner().min_value());
  const double hi = std::max(r.trace->outer().max_value(), r.trace->inner().max_value());
  double range_excess = 0.0;
  for (double v : sol.u.values) {
    if (!std::isnan(v)) range_excess = std::max({range_excess, lo - v, v - hi});
  }
  certify(r, "u outside the range of the trace", range_excess, 1e-12 * (1.0 + std::fabs(lo) + std::fabs(hi)));

  const auto mask = regular_mask(plan, grid);
  r.metrics["recovery.rotated_gradient_residual"] = check_rotated_gradient(sol.u, ras, grid, mask);
  r.metrics["recovery.grad_u_L1"] = w1p_seminorm(sol.u, 1.0, grid, mask);
  r.metrics["recovery.grad_u_L2"] = w1p_seminorm(sol.u, 2.0, grid, mask);
  r.metrics["recovery.grad_u_Linf"] = w1p_seminorm(sol.u, kInf, grid, mask);
}

}  // namespace

bool PipelineResult::certificates_ok() const {
  if (!errors.empty()) return false;
  return std::all_of(certificates.begin(), certificates.end(), [](const Certificate& c) { return c.ok || !c.gating; });
}

int PipelineResult::exit_code() const {
  if (!certificates_ok()) return exit_certificate;
  if (admissibility.overall() == Verdict::fail) return exit_inadmissible;
  if (!warnings.empty()) return exit_warnings;
  return exit_ok;
}

PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& options) {
  PipelineResult r;
  r.config = cfg;
  r.options = options;
  r.annulus = std::make_unique<Annulus>(build_annulus(cfg));
  r.data = build_data(cfg, *r.annulus);
  r.admissibility = check_admissibility(*r.annulus, *r.data);
  r.warnings = r.admissibility.warnings;
  if (options.stage == Stage::check) return r;
  if (r.admissibility.overall() == Verdict::fail && !options.force) {
    r.aborted = true;
    return r;
  }
  if (options.force && r.admissibility.overall() == Verdict::fail) {
    r.warnings.push_back("admissibility failed; later stages forced");
  }
  try {
    solve_stages(r);
  } catch (const Error& e) {
    // On forced inadmissible data a failing stage is expected, not an internal fault.
    if (r.admissibility.overall() == Verdict::fail) {
      r.warnings.push_back(std::string("stage stopped on inadmissible data: ") + e.what());
    } else {
      r.errors.push_back(e.what());
    }
  }
  return r;
}

namespace {

void condition_text(std::ostringstream& os, const char* name, const ConditionResult& c) {
  os << "  " << name << ": " << to_string(c.verdict) << "\n";
  for (const auto& w : c.witnesses) os << "    - " << w << "\n";
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json condition_json(const ConditionResult& c) {
  return {{"verdict", to_string(c.verdict)}, {"witnesses", c.witnesses}};
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::check:
      return "check";
    case Stage::solve:
      return "solve";
    case Stage::density:
      return "density";
    case Stage::reconstruct:
      return "reconstruct";
    case Stage::all:
      return "all";
  }
  return "?";
}

}  // namespace

std::string report_text(const PipelineResult& r) {
  std::ostringstream os;
  const auto& a = r.admissibility;
  os << "lgp report: " << r.config.name << "\n";
  os << "stage: " << stage_name(r.options.stage) << (r.options.force ? "  (--force)" : "") << "\n";
  os << "atoms per arc: " << r.config.atoms << "  grid h: " << r.config.h << "  norm: " << r.config.norm.name()
     << "  seed: " << r.config.seed << "\n\n";
  os << "admissibility: " << to_string(a.overall()) << "\n";
  os << "  TV(inner) = " << short_num(a.tv.tv_inner) << ", TV(outer) = " << short_num(a.tv.tv_outer)
     << "  TV inequality: " << to_string(a.tv.verdict) << "\n";
  condition_text(os, "H1", a.h1);
  condition_text(os, "H2", a.h2);
  condition_text(os, "H3", a.h3);
  condition_text(os, "H4", a.h4);
  for (const auto& m : a.h4_margins) {
    os << "    " << m.family << ": lhs " << short_num(m.lhs) << ", rhs " << short_num(m.rhs) << ", margin "
       << short_num(m.margin()) << (m.vacuous ? " (vacuous)" : "") << "\n";
  }
  condition_text(os, "H5 (density bound only)", a.h5);
  os << "    c = " << short_num(a.h5_constant) << "\n";
  os << "  pairings consistent with H2: " << a.consistent_pairings << "\n";
  os << "  inner monotonicity changes: " << a.diag.monotonicity_changes_inner << "\n";
  os << "  special points:";
  for (Vec2 p : a.diag.special_points) os << " (" << short_num(p.x) << ", " << short_num(p.y) << ")";
  os << (a.diag.special_points.empty() ? " none\n" : "\n");
  if (r.aborted) os << "\nlater stages skipped: admissibility failed (use --force to run them)\n";
  if (!r.certificates.empty()) {
    os << "\ncertificates:\n";
    for (const auto& c : r.certificates) {
      os << "  [" << (c.ok ? "ok" : (c.gating ? "FAIL" : "fail, not gating")) << "] " << c.name << " = "
         << short_num(c.value) << " (limit " << short_num(c.limit) << ")\n";
    }
  }
  if (!r.divergence.empty()) {
    os << "\nweak divergence residuals:\n";
    for (const auto& d : r.divergence) {
      os << "  " << d.name << ": " << short_num(d.residual) << " <= " << short_num(d.tolerance)
         << (d.ok() ? "" : "  FAIL") << "\n";
    }
  }
  if (!r.metrics.empty()) {
    os << "\nmetrics:\n";
    for (const auto& [k, v] : r.metrics) os << "  " << k << " = " << short_num(v) << "\n";
  }
  if (!r.warnings.empty()) {
    os << "\nwarnings:\n";
    for (const auto& w : r.warnings) os << "  - " << w << "\n";
  }
  if (!r.errors.empty()) {
    os << "\nerrors:\n";
    for (const auto& e : r.errors) os << "  - " << e << "\n";
  }
  os << "\nexit code: " << r.exit_code() << "\n";
  return os.str();
}

std::string report_json(const PipelineResult& r) {
  const auto& a = r.admissibility;
  nlohmann::json j;
  j["name"] = r.config.name;
  j["stage"] = stage_name(r.options.stage);
  j["forced"] = r.options.force;
  j["atoms"] = r.config.atoms;
  j["grid_h"] = r.config.h;
  j["norm"] = r.config.norm.name();
  j["seed"] = r.config.seed;
  nlohmann::json adm;
  adm["overall"] = to_string(a.overall());
  adm["tv_inner"] = a.tv.tv_inner;
  adm["tv_outer"] = a.tv.tv_outer;
  adm["tv_inequality"] = to_string(a.tv.verdict);
  adm["H1"] = condition_json(a.h1);
  adm["H2"] = condition_json(a.h2);
  adm["H3"] = condition_json(a.h3);
  adm["H4"] = condition_json(a.h4);
  adm["H5"] = condition_json(a.h5);
  adm["h5_constant"] = finite_or_null(a.h5_constant);
  adm["h4_margins"] = nlohmann::json::array();
  for (const auto& m : a.h4_margins) {
    adm["h4_margins"].push_back({{"family", m.family},
                                 {"lhs", finite_or_null(m.lhs)},
                                 {"rhs", finite_or_null(m.rhs)},
                                 {"margin", finite_or_null(m.margin())},
                                 {"vacuous", m.vacuous}});
  }
  adm["consistent_pairings"] = a.consistent_pairings;
  adm["monotonicity_changes_inner"] = a.diag.monotonicity_changes_inner;
  adm["special_points"] = nlohmann::json::array();
  for (Vec2 p : a.diag.special_points) adm["special_points"].push_back({p.x, p.y});
  j["admissibility"] = adm;
  j["aborted"] = r.aborted;
  j["trace_anchored"] = r.trace_anchored;
  j["certificates"] = nlohmann::json::array();
  for (const auto& c : r.certificates) {
    j["certificates"].push_back(
        {{"name", c.name}, {"value", finite_or_null(c.value)}, {"limit", c.limit}, {"ok", c.ok}, {"gating", c.gating}});
  }
  j["divergence"] = nlohmann::json::array();
  for (const auto& d : r.divergence) {
    j["divergence"].push_back({{"test", d.name}, {"residual", d.residual}, {"tolerance", d.tolerance}});
  }
  j["metrics"] = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = finite_or_null(v);
  j["warnings"] = r.warnings;
  j["errors"] = r.errors;
  j["exit_code"] = r.exit_code();
  return j.dump(2) + "\n";
}

namespace {

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    const auto target = dir_ / name;
    const auto tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw Error(ErrorCode::config, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    written_.push_back(target);
  }

  std::vector<std::filesystem::path> written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

std::string plan_csv(const TransportPlan& plan, const std::vector<double>* levels) {
  std::ostringstream os;
  os << "source,sink,source_x,source_y,sink_x,sink_y,mass,cost" << (levels ? ",level" : "") << "\n";
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    const auto& p = plan.pairs[k];
    os << p.source << "," << p.sink << "," << num(plan.from(p).x) << "," << num(plan.from(p).y) << ","
       << num(plan.to(p).x) << "," << num(plan.to(p).y) << "," << num(p.mass) << "," << num(plan.pair_cost(p));
    if (levels) os << "," << num((*levels)[k]);
    os << "\n";
  }
  return os.str();
}

std::string potential_csv(const TransportPlan& plan) {
  std::ostringstream os;
  os << "role,index,side,s,x,y,mass,phi\n";
  const auto rows = [&](const char* role, const AtomicMeasure& m, const std::vector<double>& phi) {
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      const auto& a = m.atoms[i];
      os << role << "," << i << "," << to_string(a.side) << "," << num(a.s) << "," << num(a.point.x) << ","
         << num(a.point.y) << "," << num(a.mass) << "," << num(phi[i]) << "\n";
    }
  };
  rows("source", plan.sources, plan.source_potential);
  rows("sink", plan.sinks, plan.sink_potential);
  return os.str();
}

}  // namespace

std::vector<std::filesystem::path> write_artifacts(const PipelineResult& r, const std::filesystem::path& dir,
                                                   bool full) {
  Artifacts out(dir);
  out.write("report.txt", report_text(r));
  out.write("report.json", report_json(r));
  if (r.plan) out.write("figure.svg", render_svg(r));
  if (!full) return out.written();
  if (r.plan) {
    out.write("plan.csv", plan_csv(*r.plan, r.solution ? &r.solution->levels : nullptr));
    out.write("potential.csv", potential_csv(*r.plan));
  }
  if (r.raster && r.grid) {
    const Grid& g = *r.grid;
    const auto sigma = r.raster->sigma.density(g.h());
    const auto wx = r.raster->flow.density(g.h(), 0);
    const auto wy = r.raster->flow.density(g.h(), 1);
    std::ostringstream s, w;
    s << "x,y,sigma\n";
    w << "x,y,wx,wy\n";
    for (std::size_t c = 0; c < g.cells(); ++c) {
      if (g.flag(c) == CellFlag::exterior && sigma[c] == 0.0) continue;
      const Vec2 z = g.center(c);
      s << num(z.x) << "," << num(z.y) << "," << num(sigma[c]) << "\n";
      w << num(z.x) << "," << num(z.y) << "," << num(wx[c]) << "," << num(wy[c]) << "\n";
    }
    out.write("sigma.csv", s.str());
    out.write("flow.csv", w.str());
  }
  if (r.solution && r.grid) {
    const Grid& g = *r.grid;
    std::ostringstream u;
    u << "x,y,u\n";
    for (std::size_t c = 0; c < g.cells(); ++c) {
      if (g.flag(c) == CellFlag::exterior) continue;
      const Vec2 z = g.center(c);
      u << num(z.x) << "," << num(z.y) << "," << num(r.solution->u.values[c]) << "\n";
    }
    out.write("u.csv", u.str());
  }
  return out.written();
}

}  // namespace lgp
