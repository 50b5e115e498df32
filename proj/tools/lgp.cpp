// lgp: least gradient problems on annuli via boundary-to-boundary transport.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lgp/error.hpp"
#include "lgp/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::size_t atoms = 0;
  double h = 0.0;
  std::string norm;
  std::string out;
  long long seed = -1;
  bool force = false;
};

int run(lgp::Stage stage, const Overrides& o, bool full_artifacts) {
  lgp::RunConfig cfg = lgp::load_config(o.config);
  if (o.atoms != 0) {
    if (o.atoms < 2) throw lgp::Error(lgp::ErrorCode::config, "--atoms must be at least 2");
    cfg.atoms = o.atoms;
  }
  if (o.h != 0.0) {
    if (!(o.h > 0.0)) throw lgp::Error(lgp::ErrorCode::config, "--grid-h must be positive");
    cfg.h = o.h;
  }
  if (!o.norm.empty()) cfg.norm = lgp::parse_norm(o.norm);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);

  const lgp::PipelineResult r = lgp::run_pipeline(cfg, {stage, o.force});
  std::cout << lgp::report_text(r);
  const auto written = lgp::write_artifacts(r, cfg.out_dir, full_artifacts);
  std::cout << "artifacts:";
  for (const auto& p : written) std::cout << " " << p.string();
  std::cout << "\n";
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least gradient problems on annuli via boundary-to-boundary optimal transport"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    lgp::Stage stage;
    bool full;
  };
  const Command commands[] = {
      {"check", "check admissibility only", lgp::Stage::check, true},
      {"solve", "check, then solve the transport problem", lgp::Stage::solve, true},
      {"density", "solve, then rasterize the transport density and flow", lgp::Stage::density, true},
      {"reconstruct", "run every stage through the reconstruction of u", lgp::Stage::reconstruct, true},
      {"report", "run every stage; write only the reports and the figure", lgp::Stage::all, false},
      {"all", "run every stage and write every artifact", lgp::Stage::all, true},
  };
  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("config", o.config, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--atoms", o.atoms, "atoms per monotone density run");
    sub->add_option("--grid-h", o.h, "grid spacing");
    sub->add_option("--norm", o.norm, "cost norm: euclidean or p (e.g. 3)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed for sampled checks");
    sub->add_flag("--force", o.force, "continue past a failed admissibility check");
    sub->callback([&chosen, &c] { chosen = &c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lgp::exit_config;
  }

  try {
    return run(chosen->stage, o, chosen->full);
  } catch (const lgp::Error& e) {
    std::cerr << "lgp: " << e.what() << "\n";
    const bool user = e.code() == lgp::ErrorCode::config || e.code() == lgp::ErrorCode::invalid_input ||
                      e.code() == lgp::ErrorCode::outside_annulus;
    return user ? lgp::exit_config : lgp::exit_certificate;
  } catch (const std::exception& e) {
    std::cerr << "lgp: " << e.what() << "\n";
    return lgp::exit_certificate;
  }
}
