#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gkreg/hybrid.hpp"

namespace gkreg {

struct ExperimentConfig {
  std::string problem = "shaw";
  std::size_t n = 1000;  // image side for blur
  double noise = 1e-2;
  std::string reg = "d1";  // identity | d1 | d2d-kron
  std::size_t k_max = 30;
  double tol = 1e-6;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "gkreg-out";
  bool reorthogonalize = true;
  std::size_t band = 3;
  double sigma = 0.7;
  double tau = 1.01;
  std::string import_dir;  // overrides the generator when nonempty
};

ExperimentConfig config_from_json_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);
// Dimension-independent sanity checks (positive fields, known names).
void validate_config(const ExperimentConfig& cfg);

ProblemInstance build_problem(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunArtifacts {
  HybridRun run;
  std::optional<std::size_t> best_k;
  double min_relative_error = 0.0;
  DiscrepancySelection discrepancy;
  std::filesystem::path csv_path, summary_path, svg_path;
};

// Executes one run with seeds.front(), writing results.csv, summary.json and
// curve.svg (plus PGM images for 2-D problems) into cfg.out_dir. The
// directory is probed for writability before any computation starts. All
// output bytes except elapsed-time fields are deterministic.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
  std::uint64_t seed = 0;
  double min_relative_error = 0.0;
  std::size_t best_k = 0;
  std::size_t discrepancy_k = 0;
  bool discrepancy_crossed = false;
  double total_elapsed_ms = 0.0;
};

struct SweepArtifacts {
  std::vector<SweepRow> rows;
  double median_min_error = 0.0;
  double q1_min_error = 0.0;
  double q3_min_error = 0.0;
  std::filesystem::path csv_path, summary_path;
};

// Runs every seed (>= 2 required) and aggregates. Seeds execute in parallel,
// capped by the GKREG_THREADS environment variable.
SweepArtifacts run_sweep(const ExperimentConfig& cfg);

// Rendering helpers, exposed for tests; all produce deterministic bytes.
std::string format_results_csv(const HybridRun& run);
std::string render_error_curve_svg(const HybridRun& run);
std::string format_pgm(std::span<const double> image, std::size_t side);
void atomic_write(const std::filesystem::path& path, std::string_view content);

inline constexpr const char* results_csv_header =
    "k,relative_error,residual_norm,inner_iterations,cumulative_elapsed_ms";

}  // namespace gkreg
