#include "gkreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gkreg {

namespace {

using nlohmann::json;

template <typename... Args>
std::string strf(const char* fmt, Args... args) {
  char buf[320];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const std::vector<std::string>& known_problems() {
  static const std::vector<std::string> names = {"shaw", "baart", "gravity",
                                                 "deriv2", "heat", "blur"};
  return names;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  const auto& names = known_problems();
  if (cfg.import_dir.empty() &&
      std::find(names.begin(), names.end(), cfg.problem) == names.end())
    throw std::invalid_argument("config: unknown problem '" + cfg.problem + "'");
  if (cfg.n == 0) throw std::invalid_argument("config: n must be positive");
  if (cfg.noise < 0.0) throw std::invalid_argument("config: noise must be nonnegative");
  reg_choice_from_string(cfg.reg);
  if (cfg.k_max == 0) throw std::invalid_argument("config: kmax must be positive");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: at least one seed required");
  if (cfg.tau < 1.0) throw std::invalid_argument("config: tau must be >= 1");
  if (cfg.problem == "blur" && !(cfg.sigma > 0.0))
    throw std::invalid_argument("config: sigma must be positive");
}

ExperimentConfig config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j = json::parse(in);
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "problem") cfg.problem = value.get<std::string>();
    else if (key == "n") cfg.n = value.get<std::size_t>();
    else if (key == "noise") cfg.noise = value.get<double>();
    else if (key == "L") cfg.reg = value.get<std::string>();
    else if (key == "kmax") cfg.k_max = value.get<std::size_t>();
    else if (key == "tol") cfg.tol = value.get<double>();
    else if (key == "seed") cfg.seeds = {value.get<std::uint64_t>()};
    else if (key == "seeds") cfg.seeds = value.get<std::vector<std::uint64_t>>();
    else if (key == "out") cfg.out_dir = value.get<std::string>();
    else if (key == "reorthogonalize") cfg.reorthogonalize = value.get<bool>();
    else if (key == "band") cfg.band = value.get<std::size_t>();
    else if (key == "sigma") cfg.sigma = value.get<double>();
    else if (key == "tau") cfg.tau = value.get<double>();
    else if (key == "import") cfg.import_dir = value.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  j["n"] = cfg.n;
  j["noise"] = cfg.noise;
  j["L"] = cfg.reg;
  j["kmax"] = cfg.k_max;
  j["tol"] = cfg.tol;
  j["seeds"] = cfg.seeds;
  j["out"] = cfg.out_dir;
  j["reorthogonalize"] = cfg.reorthogonalize;
  j["tau"] = cfg.tau;
  if (cfg.problem == "blur") {
    j["band"] = cfg.band;
    j["sigma"] = cfg.sigma;
  }
  if (!cfg.import_dir.empty()) j["import"] = cfg.import_dir;
  return j.dump(2) + "\n";
}

ProblemInstance build_problem(const ExperimentConfig& cfg, std::uint64_t seed) {
  const RegChoice reg = reg_choice_from_string(cfg.reg);
  if (!cfg.import_dir.empty())
    return make_problem_from_files(cfg.import_dir, cfg.noise, seed, reg);
  return make_problem(cfg.problem, cfg.n, cfg.noise, seed, reg,
                      BlurParams{cfg.band, cfg.sigma});
}

std::string format_results_csv(const HybridRun& run) {
  std::string out = results_csv_header;
  out += '\n';
  for (const auto& r : run.records)
    out += strf("%zu,%.17g,%.17g,%zu,%.17g\n", r.k, r.relative_error, r.residual_norm,
                r.inner_iterations, r.cumulative_elapsed_ms);
  return out;
}

std::string render_error_curve_svg(const HybridRun& run) {
  const bool use_err =
      !run.records.empty() && !std::isnan(run.records.front().relative_error);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(run.records.size());
  for (const auto& r : run.records) {
    double y = use_err ? r.relative_error : r.residual_norm;
    pts.emplace_back(static_cast<double>(r.k), std::max(y, 1e-300));
  }

  constexpr double width = 720, height = 480;
  constexpr double ml = 76, mr = 24, mt = 44, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double ymin = 1.0, ymax = 1.0, kmax = 1.0;
  if (!pts.empty()) {
    ymin = ymax = pts.front().second;
    for (const auto& [k, y] : pts) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      kmax = std::max(kmax, k);
    }
  }
  int elo = static_cast<int>(std::floor(std::log10(ymin)));
  int ehi = static_cast<int>(std::ceil(std::log10(ymax)));
  if (ehi <= elo) ehi = elo + 1;
  const double llo = elo, lhi = ehi;

  auto xpix = [&](double k) { return ml + (k - 1.0) / std::max(kmax - 1.0, 1.0) * pw; };
  auto ypix = [&](double y) { return mt + (lhi - std::log10(y)) / (lhi - llo) * ph; };

  std::string s;
  s += strf("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
            "viewBox=\"0 0 %.0f %.0f\">\n", width, height, width, height);
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += strf("<text x=\"%.2f\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
            "text-anchor=\"middle\">%s: %s vs k</text>\n",
            ml + pw / 2.0, run.problem.c_str(), use_err ? "relative error" : "residual norm");

  const int estep = std::max(1, (ehi - elo + 9) / 10);
  for (int e = elo; e <= ehi; e += estep) {
    const double y = ypix(std::pow(10.0, e));
    s += strf("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n",
              ml, y, ml + pw, y);
    s += strf("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"end\">1e%d</text>\n", ml - 6, y + 4, e);
  }
  const int kstep = std::max(1, static_cast<int>(kmax) / 8);
  for (int k = 1; k <= static_cast<int>(kmax); k += kstep) {
    const double x = xpix(k);
    s += strf("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n",
              x, mt, x, mt + ph);
    s += strf("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
              "text-anchor=\"middle\">%d</text>\n", x, mt + ph + 16, k);
  }
  s += strf("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
            "stroke=\"#333333\"/>\n", ml, mt, pw, ph);
  s += strf("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
            "text-anchor=\"middle\">k</text>\n", ml + pw / 2.0, height - 14);

  if (!pts.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#0b62a4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      s += strf("%s%.2f,%.2f", i ? " " : "", xpix(pts[i].first), ypix(pts[i].second));
    s += "\"/>\n";
    for (const auto& [k, y] : pts)
      s += strf("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"#0b62a4\"/>\n",
                xpix(k), ypix(y));
  }
  s += "</svg>\n";
  return s;
}

std::string format_pgm(std::span<const double> image, std::size_t side) {
  if (image.size() != side * side) throw std::invalid_argument("format_pgm: not a square image");
  double lo = image[0], hi = image[0];
  for (double v : image) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::string s = strf("P2\n%zu %zu\n255\n", side, side);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const int g = static_cast<int>(std::lround((image[i + j * side] - lo) * scale));
      s += strf("%s%d", j ? " " : "", g);
    }
    s += '\n';
  }
  return s;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void probe_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

json summary_json(const ExperimentConfig& cfg, const ProblemInstance& p,
                  const RunArtifacts& art) {
  const HybridRun& run = art.run;
  json j;
  j["problem"] = run.problem;
  j["m"] = p.a->rows();
  j["n"] = p.a->cols();
  j["epsilon"] = cfg.noise;
  j["L"] = cfg.reg;
  j["kmax_requested"] = cfg.k_max;
  j["k_last"] = run.records.empty() ? 0 : run.records.back().k;
  j["tol"] = run.tol;
  j["seed"] = run.seed;
  j["reorthogonalize"] = run.reorthogonalized;
  j["metric"] = "||L(x - x_true)|| / ||L x_true||";
  if (art.best_k) {
    j["best_k"] = *art.best_k;
    j["min_relative_error"] = art.min_relative_error;
    double last = run.records.back().relative_error;
    j["error_at_last_k"] = last;
    j["semi_convergence"] = last > 1.2 * art.min_relative_error;
  } else {
    j["best_k"] = nullptr;
    j["min_relative_error"] = nullptr;
    j["error_at_last_k"] = nullptr;
    j["semi_convergence"] = nullptr;
  }
  j["discrepancy_k"] = art.discrepancy.k;
  j["discrepancy_crossed"] = art.discrepancy.crossed;
  j["tau"] = cfg.tau;
  j["noise_norm"] = run.noise_norm;
  if (run.breakdown_at)
    j["breakdown_at"] = *run.breakdown_at;
  else
    j["breakdown_at"] = nullptr;
  std::size_t inner_total = 0, inner_max = 0;
  for (const auto& r : run.records) {
    inner_total += r.inner_iterations;
    inner_max = std::max(inner_max, r.inner_iterations);
  }
  j["inner_iterations_total"] = inner_total;
  j["inner_iterations_max"] = inner_max;
  j["total_elapsed_ms"] = run.total_elapsed_ms;
  return j;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::filesystem::path out(cfg.out_dir);
  probe_writable(out);

  ProblemInstance p = build_problem(cfg, cfg.seeds.front());
  LsqrOptions inner;
  inner.tol = cfg.tol;
  RunArtifacts art;
  art.run = hyb_lsmr(p, cfg.k_max, inner, cfg.reorthogonalize);

  if (p.has_x_true() && !art.run.records.empty()) {
    art.best_k = select_best_k(art.run);
    for (const auto& r : art.run.records)
      if (r.k == *art.best_k) art.min_relative_error = r.relative_error;
  }
  if (art.run.noise_norm > 0.0 && !art.run.records.empty())
    art.discrepancy = select_k_discrepancy(art.run, art.run.noise_norm, cfg.tau);
  else if (!art.run.records.empty())
    art.discrepancy = {art.run.records.back().k, false};

  art.csv_path = out / "results.csv";
  art.summary_path = out / "summary.json";
  art.svg_path = out / "curve.svg";
  atomic_write(art.csv_path, format_results_csv(art.run));
  atomic_write(art.summary_path, summary_json(cfg, p, art).dump(2) + "\n");
  atomic_write(art.svg_path, render_error_curve_svg(art.run));
  atomic_write(out / "config.json", config_to_json(cfg));

  if (cfg.problem == "blur" && cfg.import_dir.empty()) {
    atomic_write(out / "x_true.pgm", format_pgm(p.x_true, cfg.n));
    atomic_write(out / "b.pgm", format_pgm(p.b, cfg.n));
    const std::size_t show_k = art.best_k.value_or(art.discrepancy.k);
    for (const auto& r : art.run.records)
      if (r.k == show_k) atomic_write(out / "x_best.pgm", format_pgm(r.x_lk, cfg.n));
  }
  return art;
}

namespace {

std::size_t sweep_worker_cap() {
  if (const char* env = std::getenv("GKREG_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

SweepArtifacts run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.seeds.size() < 2)
    throw std::invalid_argument("sweep: needs at least two seeds");
  const std::filesystem::path out(cfg.out_dir);
  probe_writable(out);

  const std::size_t workers = std::min(cfg.seeds.size(), sweep_worker_cap());
  SweepArtifacts agg;
  agg.rows.resize(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

#ifdef _OPENMP
  const int omp_share =
      std::max(1, omp_get_max_threads() / static_cast<int>(workers));
#endif

  auto work = [&]() {
#ifdef _OPENMP
    if (workers > 1) omp_set_num_threads(omp_share);
#endif
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.seeds.size()) return;
      try {
        ProblemInstance p = build_problem(cfg, cfg.seeds[i]);
        LsqrOptions inner;
        inner.tol = cfg.tol;
        HybridRun run = hyb_lsmr(p, cfg.k_max, inner, cfg.reorthogonalize);
        SweepRow row;
        row.seed = cfg.seeds[i];
        if (p.has_x_true() && !run.records.empty()) {
          row.best_k = select_best_k(run);
          for (const auto& r : run.records)
            if (r.k == row.best_k) row.min_relative_error = r.relative_error;
        } else {
          row.min_relative_error = std::numeric_limits<double>::quiet_NaN();
        }
        if (run.noise_norm > 0.0 && !run.records.empty()) {
          const auto sel = select_k_discrepancy(run, run.noise_norm, cfg.tau);
          row.discrepancy_k = sel.k;
          row.discrepancy_crossed = sel.crossed;
        }
        row.total_elapsed_ms = run.total_elapsed_ms;
        agg.rows[i] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> errs;
  for (const auto& r : agg.rows)
    if (!std::isnan(r.min_relative_error)) errs.push_back(r.min_relative_error);
  std::sort(errs.begin(), errs.end());
  agg.median_min_error = quantile(errs, 0.5);
  agg.q1_min_error = quantile(errs, 0.25);
  agg.q3_min_error = quantile(errs, 0.75);

  std::string csv = "seed,min_relative_error,best_k,discrepancy_k,discrepancy_crossed,"
                    "total_elapsed_ms\n";
  for (const auto& r : agg.rows)
    csv += strf("%llu,%.17g,%zu,%zu,%d,%.17g\n",
                static_cast<unsigned long long>(r.seed), r.min_relative_error, r.best_k,
                r.discrepancy_k, r.discrepancy_crossed ? 1 : 0, r.total_elapsed_ms);
  agg.csv_path = out / "sweep.csv";
  atomic_write(agg.csv_path, csv);

  json j;
  j["problem"] = cfg.problem;
  j["n"] = cfg.n;
  j["epsilon"] = cfg.noise;
  j["L"] = cfg.reg;
  j["kmax"] = cfg.k_max;
  j["tol"] = cfg.tol;
  j["seeds"] = cfg.seeds;
  j["median_min_relative_error"] = agg.median_min_error;
  j["iqr_min_relative_error"] = {agg.q1_min_error, agg.q3_min_error};
  json rows = json::array();
  for (const auto& r : agg.rows) {
    json row;
    row["seed"] = r.seed;
    row["min_relative_error"] = r.min_relative_error;
    row["best_k"] = r.best_k;
    row["discrepancy_k"] = r.discrepancy_k;
    row["discrepancy_crossed"] = r.discrepancy_crossed;
    row["total_elapsed_ms"] = r.total_elapsed_ms;
    rows.push_back(row);
  }
  j["per_seed"] = rows;
  agg.summary_path = out / "sweep_summary.json";
  atomic_write(agg.summary_path, j.dump(2) + "\n");
  return agg;
}

}  // namespace gkreg
