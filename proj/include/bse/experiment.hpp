#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bse/asymptotics.hpp"
#include "bse/branching_sim.hpp"
#include "bse/fixed_point_solver.hpp"
#include "bse/path_supremum.hpp"
#include "bse/stable_law.hpp"

namespace bse {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit contract shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 2,
  kExitInvalidInput = 3,
  kExitIoError = 4,
};

/// One experiment: stable parameters, offspring law, caps, resolutions,
/// grid, seed and output location. A config plus a seed pins every byte
/// of the artifacts, for any thread count.
struct ExperimentConfig {
  double alpha = 1.5;
  double beta = 0.0;
  std::vector<double> law = {0.5, 0.0, 0.5};
  std::int64_t max_particles = 1'000'000;
  double max_time = 1e30;
  int n_steps = 2048;               // cloud steps over [0,e]; sim steps per unit time
  std::int64_t cloud_size = 100'000;
  std::int64_t replications = 100'000;
  double x1 = 0.01;                 // first positive grid node
  double x_max = 1000.0;
  int grid_points = 401;
  double tol = 1e-8;
  int max_iter = 10'000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output_dir = "out";

  /// Throws std::invalid_argument on any inadmissible field.
  void validate() const;

  /// Canonical key=value serialization (field order fixed); the config
  /// hash embedded in every artifact is the FNV-1a of this string.
  std::string canonical_string() const;
  std::uint64_t hash() const;

  StableParams stable_params() const { return validate_params(alpha, beta); }
  OffspringLaw offspring_law() const { return make_offspring_law(law); }
  SimCaps caps() const { return {max_particles, max_time}; }
  Eigen::ArrayXd grid() const { return geometric_grid(x1, x_max, grid_points); }
};

/// Two-sample Kolmogorov-Smirnov distance sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Critical KS distance at significance level for samples of size n and m.
double ks_threshold(double level, std::size_t n, std::size_t m);

struct SimulateSummary {
  std::int64_t replications = 0;
  double truncated_fraction = 0.0;
  double extinct_fraction = 0.0;
  double mean_particles = 0.0;
  std::vector<std::pair<double, double>> max_quantiles;  // (q, value), non-truncated runs
  std::optional<double> single_particle_ks;  // only for the p0-only law
  std::optional<double> single_particle_ks_threshold;
  std::string runs_csv;
  std::string summary_json;
};

/// Runs the batch and persists one CSV row per replicate plus a JSON
/// summary. Byte-identical for equal (config, seed), any thread count.
SimulateSummary run_simulate(const ExperimentConfig& cfg);

struct SolveOutput {
  SandwichResult sandwich;
  ResidualReport residual;
  TabulatedFn u;     // the from-one solution
  TabulatedFn phi0;
  std::string u_csv;
  std::string phi0_csv;
  std::string residual_csv;
  std::string cloud_csv;
  std::string summary_json;
};

/// Samples the cloud, solves from both starts, checks the residual bound
/// and persists u, phi0 and the residual diagnostics.
SolveOutput run_solve(const ExperimentConfig& cfg);

struct VerifyCheck {
  std::string name;
  bool enabled = true;
  bool pass = false;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool pass = false;
  std::string report_json;
  std::string curve_csv;
};

struct VerifyOptions {
  double exponent_offset = 0.0;  // negative-control injection
  bool tauberian = true;         // probe runs when alpha <= 1
};

/// End-to-end verification: simulate, solve, fit the tails and compare
/// with the theoretical targets; writes a machine-readable report and a
/// plot-ready (x, survival, target) CSV. Returns pass = all enabled
/// checks green.
VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opts = {});

}  // namespace bse
