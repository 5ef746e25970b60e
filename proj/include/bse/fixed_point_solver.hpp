#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bse/branching_sim.hpp"
#include "bse/path_supremum.hpp"
#include "bse/tabulated_fn.hpp"

namespace bse {

/// Precomputed empirical-expectation tables tying a cloud to a grid.
/// For every grid node x_i the in-prefix samples are those with s_j < x_i;
/// for each such pair the interpolation cell of the argument x_i - l_j is
/// frozen once (linear in x on the first cell, linear in ln x elsewhere,
/// linear continuation past the last node, floored at 0 and capped at 1).
/// Iterating the integral-equation map then reduces to fused
/// gather-interpolate-accumulate sweeps over these tables, and reusing one
/// cloud across iterations makes the fixed point deterministic.
class CloudGridTables {
 public:
  CloudGridTables(const ExpPairCloud& cloud, const Eigen::ArrayXd& grid, int threads = 0);

  Eigen::Index grid_size() const { return static_cast<Eigen::Index>(prefix_.size()); }
  std::int64_t sample_count() const { return n_; }

  /// #{s_j < x_i}.
  std::int64_t prefix_count(Eigen::Index i) const { return prefix_[i]; }

  /// Empirical P(S_e >= x_i) = 1 - prefix/n.
  double survival(Eigen::Index i) const {
    return 1.0 - static_cast<double>(prefix_[i]) / static_cast<double>(n_);
  }

  /// One sweep of the branching map applied to ys:
  ///   out_i = 1 - (1/n) sum_{s_j < x_i} F(1 - u(x_i - l_j))
  /// with F the offspring pgf. Deterministic for any thread count.
  void apply_map(const OffspringLaw& law, const Eigen::ArrayXd& ys, Eigen::ArrayXd& out,
                 int threads) const;

  /// Accumulates the first three power sums of u(x_i - l_j) over the
  /// prefix at every node: moments[k][i] = (1/n) sum u^{k+1}.
  void power_sums(const Eigen::ArrayXd& ys, Eigen::ArrayXd moments[3], int threads) const;

 private:
  struct Cell {
    std::int32_t idx;
    float frac;
  };

  double interpolate(const Eigen::ArrayXd& ys, const Cell& c) const {
    const double lo = ys[c.idx], hi = ys[c.idx + 1];
    const double v = lo + static_cast<double>(c.frac) * (hi - lo);
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }

  std::vector<std::int64_t> thread_ranges(int threads) const;

  std::int64_t n_ = 0;
  std::vector<std::int64_t> prefix_;   // per grid node
  std::vector<std::int64_t> offsets_;  // grid_size()+1 into cells_
  std::vector<Cell> cells_;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 10'000;
  enum class Start { FromOne, FromSurvival };
  Start start = Start::FromOne;
  int threads = 0;
};

struct SolveResult {
  TabulatedFn u;
  int iterations = 0;
  double final_delta = 0.0;   // last sup-norm iterate change
  double est_distance = 0.0;  // geometric-rate bound on distance to the limit
};

/// Monotone fixed-point iteration of the first-branching-event equation
///   1 - u(x) = sum_n p_n E[1{S_e < x} (1 - u(x - L_e))^n]
/// over the empirical cloud law, on the given grid (which must start
/// at 0). tol bounds the estimated sup-norm distance to the limit, not
/// merely the last iterate change, so two-sided starts meet within 2 tol.
/// Throws std::runtime_error on non-convergence within max_iter.
SolveResult solve_u_detailed(const OffspringLaw& law, const ExpPairCloud& cloud,
                             const Eigen::ArrayXd& grid, const SolveOptions& opts = {},
                             const CloudGridTables* tables = nullptr);

TabulatedFn solve_u(const OffspringLaw& law, const ExpPairCloud& cloud,
                    const Eigen::ArrayXd& grid, double tol = 1e-8, int max_iter = 10'000);

/// Runs the iteration from u = 1 (decreasing) and from the p0-only
/// solution u = P(S_e >= x) (increasing). The limits agreeing within
/// 2 tol is the operational uniqueness check; a wider gap flags the run.
struct SandwichResult {
  SolveResult from_one;
  SolveResult from_survival;
  double gap = 0.0;
  bool consistent = false;
};
SandwichResult solve_sandwich(const OffspringLaw& law, const ExpPairCloud& cloud,
                              const Eigen::ArrayXd& grid, double tol = 1e-8, int max_iter = 10'000,
                              int threads = 0);

/// phi0 = (1 - m) u + (sigma2/2) u^2, the decreasing comparison function
/// whose Laplace transform carries the tail constant.
TabulatedFn phi0_of(const TabulatedFn& u, const OffspringLaw& law);

/// Pointwise residual diagnostics: the remainder implied by
///   u = P(S_e >= x) + E[1{S_e<x} u(x-L_e)] - Phi0 + Phi_R
/// with every expectation over the cloud, against the bound
///   0 <= Phi_R <= m3 E[1{S_e<x} u^3(x-L_e)].
struct ResidualReport {
  TabulatedFn residual;
  TabulatedFn bound;
  double slack = 0.0;
  bool ok = false;
};
ResidualReport residual_check(const TabulatedFn& u, const OffspringLaw& law,
                              const ExpPairCloud& cloud, double slack = 1e-7, int threads = 0);

}  // namespace bse
