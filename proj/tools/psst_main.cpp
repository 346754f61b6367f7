// Command-line driver: explores Pareto fronts of the bundled problems,
// serializes results, and reports residual/efficiency metrics.
//
// Exit codes: 0 success, 1 bad flags or I/O failure, 2 exploration produced
// nothing (balance or every region failed), 3 gradient check over threshold.
#include "CLI11.hpp"

#include "psst/problems.hpp"
#include "psst/run_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace psst;

struct ProblemFlags {
  std::string name = "quadratic";
  int dim = 10;
  int hidden = 16;
  int samples = 256;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags* pf) {
  cmd->add_option("--problem", pf->name, "quadratic | twopeak | mlp")
      ->check(CLI::IsMember({"quadratic", "twopeak", "mlp"}));
  cmd->add_option("--dim", pf->dim, "Parameter dimension (quadratic/twopeak)");
  cmd->add_option("--hidden", pf->hidden, "Hidden width (mlp)");
  cmd->add_option("--samples", pf->samples, "Training samples (mlp)");
}

int thread_count_from_env() {
  const char* env = std::getenv("PSST_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw ConfigError("PSST_THREADS must be an integer >= 1");
  return static_cast<int>(v);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir);
}

int cmd_run(const ProblemFlags& pf, int k, int budget, std::uint64_t seed,
            const std::string& out, bool no_region, bool warm_start) {
  SolverConfig config;
  config.k_regions = k;
  config.region_budget = budget;
  config.master_seed = seed;
  config.use_regions = !no_region;
  config.warm_start = warm_start;
  config.validate();
  const int threads = thread_count_from_env();
  const auto problem = make_problem(pf.name, pf.dim, pf.hidden, pf.samples);

  ensure_out_dir(out);
  const std::string run_id = pf.name + "-s" + std::to_string(seed);

  ExplorationReport report;
  try {
    report = psst_run(*problem, config, threads);
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "error: balance descent failed: %s\n", e.what());
    return 2;
  } catch (const NoSolution& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  const bool is_mlp = pf.name == "mlp";
  RunManifest manifest = manifest_from_report(
      report, run_id, pf.name, problem->dim(), problem->tasks(),
      is_mlp ? pf.hidden : 0, is_mlp ? pf.samples : 0, config);
  manifest.command = "run";

  write_file(out + "/front.csv",
             front_csv(run_id, report.sets, problem->tasks()));
  write_file(out + "/manifest.json", manifest_json(manifest));
  write_file(out + "/best.json", best_json(report.best));

  std::printf("%s: %d points, %ld descent iters, %ld tangent solves",
              run_id.c_str(), report.total_points, report.total_descent_iters,
              report.total_tangent_solves);
  std::printf(", best main loss %.6g, wall %.3fs\n", report.best.losses(0),
              report.wall_seconds);
  return 0;
}

int cmd_sweep(const ProblemFlags& pf, int grid, std::uint64_t seed,
              const std::string& out) {
  SolverConfig config;
  config.master_seed = seed;
  config.validate();
  if (grid < 1) throw ConfigError("--grid must be >= 1");
  const auto problem = make_problem(pf.name, pf.dim, pf.hidden, pf.samples);

  ensure_out_dir(out);
  const std::string run_id =
      pf.name + "-sweep-g" + std::to_string(grid) + "-s" + std::to_string(seed);

  const auto results =
      scalarization_sweep(*problem, weight_grid_2d(grid), config, seed);

  ParetoSet set;  // one flat set, no region attached
  long total_iters = 0;
  for (const auto& r : results) {
    total_iters += r.point.iters_used;
    set.points.push_back(r.point);
  }
  const std::vector<ParetoSet> sets{set};

  const bool is_mlp = pf.name == "mlp";
  RunManifest manifest;
  manifest.command = "sweep";
  manifest.run_id = run_id;
  manifest.problem_name = pf.name;
  manifest.dim = problem->dim();
  manifest.tasks = problem->tasks();
  manifest.hidden = is_mlp ? pf.hidden : 0;
  manifest.samples = is_mlp ? pf.samples : 0;
  manifest.config = config;
  manifest.balance_losses = Vector::Zero(0);
  manifest.sweep_grid = grid;
  manifest.total_descent_iters = total_iters;
  manifest.total_points = static_cast<int>(set.points.size());

  write_file(out + "/front.csv", front_csv(run_id, sets, problem->tasks()));
  write_file(out + "/manifest.json", manifest_json(manifest));
  write_file(out + "/best.json", best_json(select_best(sets)));

  std::printf("%s: %d solutions, %ld descent iters\n", run_id.c_str(),
              manifest.total_points, total_iters);
  return 0;
}

int cmd_gradcheck(const ProblemFlags& pf, int trials, std::uint64_t seed,
                  bool corrupt) {
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  const auto problem = make_problem(pf.name, pf.dim, pf.hidden, pf.samples);
  const double threshold = pf.name == "quadratic" ? 1e-8 : 1e-5;

  std::mt19937_64 rng(seed);
  double max_rel = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector theta = uniform_vector(rng, problem->dim(), -1.0, 1.0);
    for (int m = 0; m < problem->tasks(); ++m) {
      Vector g = problem->gradient(theta, m);
      if (corrupt) g(0) += 1e-3;
      const Vector fd = finite_diff_gradient(*problem, theta, m);
      const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-12);
      max_rel = std::max(max_rel, rel);
    }
  }
  std::printf("%s gradcheck: %d trials, max relative error %.3e (threshold %.0e)\n",
              pf.name.c_str(), trials, max_rel, threshold);
  return max_rel <= threshold ? 0 : 3;
}

struct RunSummary {
  std::string run_id;
  int points = 0;
  double mean_residual = 0.0;
  double max_residual = 0.0;
  double best_main = 0.0;
  long descent_iters = 0;
  long tangent_solves = 0;
};

RunSummary summarize(const std::string& dir,
                     const std::vector<Vector>& front) {
  const RunManifest manifest =
      parse_manifest_json(read_file(dir + "/manifest.json"));
  const auto records = parse_front_csv(read_file(dir + "/front.csv"));

  RunSummary s;
  s.run_id = manifest.run_id;
  s.points = static_cast<int>(records.size());
  s.descent_iters = manifest.total_descent_iters;
  s.tangent_solves = manifest.total_tangent_solves;
  double sum = 0.0;
  for (size_t i = 0; i < records.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& f : front)
      nearest = std::min(nearest, (records[i].losses - f).norm());
    sum += nearest;
    s.max_residual = std::max(s.max_residual, nearest);
    const double main = records[i].losses(0);
    if (i == 0 || main < s.best_main) s.best_main = main;
  }
  if (!records.empty()) s.mean_residual = sum / static_cast<double>(records.size());
  return s;
}

void print_summary(const char* tag, const RunSummary& s) {
  std::printf("%-10s %-24s points %4d  mean residual %.6g  max %.6g  "
              "best main %.6g  descent iters %ld  tangent solves %ld\n",
              tag, s.run_id.c_str(), s.points, s.mean_residual, s.max_residual,
              s.best_main, s.descent_iters, s.tangent_solves);
}

int cmd_report(const std::string& run_dir, const std::string& baseline_dir) {
  const RunManifest manifest =
      parse_manifest_json(read_file(run_dir + "/manifest.json"));
  const auto problem = make_problem(manifest.problem_name, manifest.dim,
                                    manifest.hidden > 0 ? manifest.hidden : 16,
                                    manifest.samples > 0 ? manifest.samples
                                                         : 256);
  const std::vector<Vector> front = analytic_front(*problem, 10000);

  const RunSummary s = summarize(run_dir, front);
  print_summary("run", s);
  if (!baseline_dir.empty()) {
    const RunSummary b = summarize(baseline_dir, front);
    print_summary("baseline", b);
    if (b.mean_residual > 0.0 && s.mean_residual > 0.0)
      std::printf("residual ratio (run/baseline): %.4f\n",
                  s.mean_residual / b.mean_residual);
    if (b.descent_iters > 0)
      std::printf("descent-iteration ratio (run/baseline): %.4f\n",
                  static_cast<double>(s.descent_iters) /
                      static_cast<double>(b.descent_iters));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-based Pareto front exploration toolkit"};
  app.require_subcommand(1);

  ProblemFlags run_pf;
  int run_k = 5, run_budget = 20;
  std::uint64_t run_seed = 0;
  std::string run_out;
  bool run_no_region = false, run_warm = false;
  CLI::App* run = app.add_subcommand("run", "Explore the Pareto front");
  add_problem_flags(run, &run_pf);
  run->add_option("--k", run_k, "Number of preference regions");
  run->add_option("--budget", run_budget, "Point budget per region");
  run->add_option("--seed", run_seed, "Master seed");
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_flag("--no-region", run_no_region,
                "Single unrestricted exploration with the same total budget");
  run->add_flag("--warm-start", run_warm,
                "Seed every region from the balance point");

  ProblemFlags sweep_pf;
  int sweep_grid = 11;
  std::uint64_t sweep_seed = 0;
  std::string sweep_out;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Fixed-weight scalarization baseline");
  add_problem_flags(sweep, &sweep_pf);
  sweep->add_option("--grid", sweep_grid, "Number of weight vectors");
  sweep->add_option("--seed", sweep_seed, "Master seed");
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  ProblemFlags gc_pf;
  int gc_trials = 50;
  std::uint64_t gc_seed = 0;
  bool gc_corrupt = false;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Compare analytic gradients against central differences");
  add_problem_flags(gradcheck, &gc_pf);
  gradcheck->add_option("--trials", gc_trials, "Random evaluation points");
  gradcheck->add_option("--seed", gc_seed, "Sampling seed");
  gradcheck->add_flag("--corrupt", gc_corrupt)->group("");  // test hook

  std::string report_run, report_baseline;
  CLI::App* report = app.add_subcommand(
      "report", "Residual-to-front and efficiency summary of a run directory");
  report->add_option("--run", report_run, "Run directory")->required();
  report->add_option("--baseline", report_baseline,
                     "Second run directory for side-by-side comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(run))
      return cmd_run(run_pf, run_k, run_budget, run_seed, run_out,
                     run_no_region, run_warm);
    if (app.got_subcommand(sweep))
      return cmd_sweep(sweep_pf, sweep_grid, sweep_seed, sweep_out);
    if (app.got_subcommand(gradcheck))
      return cmd_gradcheck(gc_pf, gc_trials, gc_seed, gc_corrupt);
    if (app.got_subcommand(report)) return cmd_report(report_run, report_baseline);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NoSolution& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
