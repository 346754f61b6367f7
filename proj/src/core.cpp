#include "psst/core.hpp"

#include <cmath>

namespace psst {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(step_init > 0)) fail("step_init must be positive");
  if (!(armijo_c > 0 && armijo_c < 1)) fail("armijo_c must be in (0, 1)");
  if (!(backtrack > 0 && backtrack < 1)) fail("backtrack must be in (0, 1)");
  if (!(stationarity_tol > 0)) fail("stationarity_tol must be positive");
  if (max_iters < 1) fail("max_iters must be at least 1");
  if (!(active_eps > 0)) fail("active_eps must be positive");
  if (!(fw_tol > 0)) fail("fw_tol must be positive");
  if (fw_max_iters < 1) fail("fw_max_iters must be at least 1");
  if (!(krylov_tol > 0)) fail("krylov_tol must be positive");
  if (krylov_max_iters < 1) fail("krylov_max_iters must be at least 1");
  if (!(expand_step > 0)) fail("expand_step must be positive");
  if (!(novelty_delta >= 0)) fail("novelty_delta must be non-negative");
  if (k_regions < 1) fail("k_regions must be at least 1");
  if (region_budget < 1) fail("region_budget must be at least 1");
}

bool dominates(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionError("dominates: mismatched objective lengths");
  if (a.size() == 0) throw DegenerateInput("dominates: empty objectives");
  bool any_strict = false;
  for (Eigen::Index m = 0; m < a.size(); ++m) {
    if (a(m) > b(m)) return false;
    if (a(m) < b(m)) any_strict = true;
  }
  return any_strict;
}

double rho(const Vector& losses) {
  if (losses.size() < 2) throw DimensionError("rho: need at least two tasks");
  const double aux = losses.tail(losses.size() - 1).sum();
  if (!(aux > 0)) throw DegenerateInput("rho: auxiliary losses sum to zero");
  return losses(0) / aux;
}

double objective_angle(const Vector& losses) {
  if (losses.size() < 2)
    throw DimensionError("objective_angle: need at least two tasks");
  const double aux = losses.tail(losses.size() - 1).norm();
  const double main = losses(0);
  if (aux == 0.0 && main == 0.0)
    throw DegenerateInput("objective_angle: zero loss vector");
  return std::atan2(aux, main);
}

std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t region_seed(std::uint64_t master_seed, int region_index) {
  return master_seed ^ split_mix64(static_cast<std::uint64_t>(region_index) + 1);
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * uniform_unit(rng);
  return v;
}

}  // namespace psst
