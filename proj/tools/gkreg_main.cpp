#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gkreg/experiment.hpp"
#include "gkreg/validate.hpp"

namespace {

void add_common_options(CLI::App* cmd, gkreg::ExperimentConfig& cfg) {
  cmd->add_option("--problem", cfg.problem,
                  "Test problem: shaw, baart, gravity, deriv2, heat, blur");
  cmd->add_option("--n", cfg.n, "Problem size (image side for blur)");
  cmd->add_option("--noise", cfg.noise, "Relative noise level epsilon");
  cmd->add_option("--L", cfg.reg, "Regularization operator: identity, d1, d2d-kron");
  cmd->add_option("--kmax", cfg.k_max, "Outer iteration cap");
  cmd->add_option("--tol", cfg.tol, "Inner LSQR tolerance");
  cmd->add_option("--out", cfg.out_dir, "Output directory");
  cmd->add_flag("--no-reorth", [&cfg](std::size_t) { cfg.reorthogonalize = false; },
                "Disable Lanczos reorthogonalization");
  cmd->add_option("--band", cfg.band, "Blur PSF half-bandwidth");
  cmd->add_option("--sigma", cfg.sigma, "Blur PSF width");
  cmd->add_option("--tau", cfg.tau, "Discrepancy principle safety factor");
  cmd->add_option("--import", cfg.import_dir,
                  "Directory with A.txt and x_true.txt/b_true.txt to run instead of a generator");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid LSMR solver for general-form regularization of discrete "
               "ill-posed problems"};
  app.require_subcommand(1);

  gkreg::ExperimentConfig cfg;
  std::string config_path;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  std::string filter;

  // A config file provides the defaults; explicit flags override it. The
  // file is applied before the regular parse, so it is looked up first.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (!config_path.empty()) {
    try {
      cfg = gkreg::config_from_json_file(config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
    if (!cfg.seeds.empty()) seed = cfg.seeds.front();
    seeds = cfg.seeds;
  }

  CLI::App* run = app.add_subcommand("run", "Single regularization run");
  add_common_options(run, cfg);
  run->add_option("--seed", seed, "Noise seed");
  run->add_option("--config", config_path, "JSON config file with defaults");

  CLI::App* sweep = app.add_subcommand("sweep", "Multi-seed sweep with aggregation");
  add_common_options(sweep, cfg);
  sweep->add_option("--seeds", seeds, "Noise seeds (two or more)")->delimiter(',');
  sweep->add_option("--config", config_path, "JSON config file with defaults");

  CLI::App* validate = app.add_subcommand("validate", "Small-scale identity and equivalence checks");
  validate->add_option("--filter", filter, "Only run checks whose tag contains this string");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.seeds = {seed};
      gkreg::RunArtifacts art = gkreg::run_experiment(cfg);
      std::printf("run: %s n=%zu k_last=%zu\n", art.run.problem.c_str(), cfg.n,
                  art.run.records.empty() ? 0 : art.run.records.back().k);
      if (art.best_k)
        std::printf("best k=%zu min relative error=%.6g\n", *art.best_k,
                    art.min_relative_error);
      std::printf("discrepancy k=%zu crossed=%s\n", art.discrepancy.k,
                  art.discrepancy.crossed ? "yes" : "no");
      std::printf("wrote %s\n", art.csv_path.string().c_str());
      std::printf("wrote %s\n", art.summary_path.string().c_str());
      std::printf("wrote %s\n", art.svg_path.string().c_str());
      return 0;
    }
    if (sweep->parsed()) {
      if (!seeds.empty()) cfg.seeds = seeds;
      gkreg::SweepArtifacts agg = gkreg::run_sweep(cfg);
      std::printf("sweep: %zu seeds, median min error=%.6g iqr=[%.6g, %.6g]\n",
                  agg.rows.size(), agg.median_min_error, agg.q1_min_error,
                  agg.q3_min_error);
      std::printf("wrote %s\n", agg.csv_path.string().c_str());
      std::printf("wrote %s\n", agg.summary_path.string().c_str());
      return 0;
    }
    const int failures = gkreg::run_validation(filter, std::cout);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
