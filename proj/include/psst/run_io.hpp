#pragma once

#include "psst/core.hpp"
#include "psst/exploration.hpp"

#include <string>
#include <vector>

namespace psst {

inline constexpr const char* kToolVersion = "0.1.0";

// One row of front.csv.
struct FrontRecord {
  std::string run_id;
  int region_index = -1;
  int point_index = 0;
  Vector losses;
  double angle = 0.0;
  double stationarity = 0.0;
  int iters_used = 0;
};

struct ManifestRegion {
  int index = -1;
  double lo = 0.0;
  double hi = 0.0;
  long descent_iters = 0;
  long tangent_solves = 0;
  int points = 0;
  bool failed = false;
};

// Everything a run writes besides the points themselves. Serialization is
// deterministic: fixed key order, floats with 17 significant digits. Wall
// time and thread count are deliberately absent: problem, flags and seed
// alone determine every output byte.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command = "run";  // "run" | "sweep"
  std::string run_id;
  std::string problem_name;
  int dim = 0;
  int tasks = 0;
  int hidden = 0;   // MLP only, else 0
  int samples = 0;  // MLP only, else 0
  SolverConfig config;
  double pi0 = 0.0;
  Vector balance_losses;
  double balance_angle = 0.0;
  double balance_stationarity = 0.0;
  int balance_iters = 0;
  int sweep_grid = 0;  // sweep only
  std::vector<ManifestRegion> regions;
  long total_descent_iters = 0;
  long total_tangent_solves = 0;
  int total_points = 0;
};

// Shortest-of-%.17g decimal form that round-trips the exact double.
std::string format_double(double v);

// front.csv text: header run_id,region_index,point_index,L1,...,LM,angle,
// stationarity,iters_used and one row per point in set/insertion order.
std::string front_csv(const std::string& run_id,
                      const std::vector<ParetoSet>& sets, int tasks);
std::vector<FrontRecord> parse_front_csv(const std::string& text);

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest_json(const std::string& text);

std::string best_json(const ParetoPoint& best);

// Whole-file helpers; write_file throws Error on I/O failure.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

// Assembles manifest pieces shared by run and sweep.
RunManifest manifest_from_report(const ExplorationReport& report,
                                 const std::string& run_id,
                                 const std::string& problem_name, int dim,
                                 int tasks, int hidden, int samples,
                                 const SolverConfig& config);

}  // namespace psst
