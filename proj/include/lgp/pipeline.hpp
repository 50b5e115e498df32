#pragma once

// Orchestration: check -> solve -> rasterize -> reconstruct, with every
// certificate collected into one report, plus artifact emission.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lgp/admissibility.hpp"
#include "lgp/config.hpp"
#include "lgp/density.hpp"
#include "lgp/recovery.hpp"
#include "lgp/transport.hpp"

namespace lgp {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_inadmissible = 2, exit_warnings = 3, exit_certificate = 4 };

struct Certificate {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool ok = true;
  bool gating = true;  // a failing gating certificate gives exit code 4
};

struct PipelineOptions {
  Stage stage = Stage::all;
  bool force = false;
};

struct PipelineResult {
  RunConfig config;
  PipelineOptions options;
  std::unique_ptr<Annulus> annulus;
  std::optional<BoundaryFunction> data;
  std::optional<BoundaryFunction> trace;  // anchored g~ (plus the configured shift)
  bool trace_anchored = false;
  AdmissibilityReport admissibility;
  bool aborted = false;  // stopped after a failed admissibility check
  std::optional<BoundaryMeasure> measure;
  std::optional<TransportPlan> plan;
  std::unique_ptr<Grid> grid;
  std::optional<Rasterization> raster;
  std::optional<ScalarField> phi;
  std::vector<DivergenceResult> divergence;
  std::optional<ReconstructedSolution> solution;
  std::optional<BoundaryFunction> recovered_trace;
  std::vector<Certificate> certificates;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;

  bool certificates_ok() const;
  int exit_code() const;
};

// Config and geometry errors propagate as Error; failures inside the solve
// stages are recorded in `errors` and reported through exit code 4.
PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& options);

std::string report_text(const PipelineResult& r);
std::string report_json(const PipelineResult& r);
std::string render_svg(const PipelineResult& r);

// Writes the artifacts the run produced (temp file + rename each).
// `full` = false limits the output to the report files and the figure.
std::vector<std::filesystem::path> write_artifacts(const PipelineResult& r, const std::filesystem::path& dir,
                                                   bool full = true);

}  // namespace lgp
