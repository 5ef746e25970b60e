#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "bse/rng.hpp"
#include "bse/stable_law.hpp"
#include "bse/tabulated_fn.hpp"

namespace bse {

/// Position and running supremum of one stable path observed at an
/// independent Exp(1) time e. The supremum is the maximum over the
/// discretization grid (which includes the starting value 0), so it
/// under-estimates the true supremum; refinement drift is audited by the
/// acceptance suite.
struct ExpPairSample {
  double e;  // exponential clock
  double l;  // terminal position L_e
  double s;  // grid running supremum of the path, >= max(l, 0)
};

/// Terminal value and grid supremum of a stable path over [0, duration]
/// sampled with n_steps equal increments.
struct PathExtrema {
  double terminal;
  double supremum;
};

PathExtrema walk_path(const StableParams& params, double duration, int n_steps, SplitMix64& g);

/// Draws e ~ Exp(1), partitions [0,e] into n_steps equal increments and
/// accumulates independent stable increments.
ExpPairSample sample_pair(const StableParams& params, int n_steps, SplitMix64& g);

/// i.i.d. samples of (e, L_e, S_e), the empirical stand-in for the law of
/// the driving pair in the integral equation.
struct ExpPairCloud {
  Eigen::ArrayXd e;
  Eigen::ArrayXd l;
  Eigen::ArrayXd s;
  int n_steps = 0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return e.size(); }
};

/// count independent sample_pair draws. Sample i uses the substream
/// (seed, i), so the cloud is identical for any thread count.
ExpPairCloud sample_cloud(const StableParams& params, int n_steps, Eigen::Index count,
                          std::uint64_t seed, int threads = 0);

}  // namespace bse
