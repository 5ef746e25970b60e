#pragma once

#include <cstdint>
#include <vector>

#include "bse/rng.hpp"
#include "bse/stable_law.hpp"

namespace bse {

/// Finite-support offspring distribution p_0..p_K with its derived
/// moments. Only critical (m = 1) and subcritical (m < 1) laws are
/// accepted; finite support makes the third moment finite automatically.
struct OffspringLaw {
  std::vector<double> probs;  // p_0..p_K
  double m = 0.0;             // mean offspring count
  double sigma2 = 0.0;        // sum n(n-1) p_n, the variance in the critical case
  double m3 = 0.0;            // third moment of the offspring count

  bool critical() const { return m > 1.0 - 1e-12; }

  /// Probability generating function sum p_n w^n.
  double pgf(double w) const {
    double acc = 0.0;
    for (std::size_t n = probs.size(); n-- > 0;) acc = probs[n] + w * acc;
    return acc;
  }

  /// Inverse-CDF draw of an offspring count.
  int sample(SplitMix64& g) const {
    double u = uniform_open(g);
    for (std::size_t n = 0; n + 1 < probs.size(); ++n) {
      u -= probs[n];
      if (u < 0.0) return static_cast<int>(n);
    }
    return static_cast<int>(probs.size()) - 1;
  }
};

/// Validates probabilities (non-negative, sum 1 within 1e-12, p_1 != 1,
/// mean <= 1) and derives m, sigma2, m3. Throws std::invalid_argument.
OffspringLaw make_offspring_law(const std::vector<double>& probs);

/// Limits that convert runaway trees into flagged, truncated results.
struct SimCaps {
  std::int64_t max_particles = 1'000'000;
  double max_time = 1e30;
};

/// One branching-tree realization.
struct RunResult {
  double max = 0.0;             // all-time maximum over every edge
  bool extinct = false;         // tree died out before any cap fired
  std::int64_t particles = 0;   // total particles ever born
  bool truncated = false;       // a cap fired; excluded from tail fits
};

/// Runs one tree: each particle lives Exp(1), moves along its edge as a
/// stable path discretized at steps_per_unit steps per unit time (floor 64
/// per edge), and is replaced at death by offspring drawn from the law at
/// its death position. Traversal is depth-first; every particle draws from
/// the substream keyed by its Ulam-Harris label, so the result depends
/// only on run_key.
RunResult simulate_run(const StableParams& params, const OffspringLaw& law, const SimCaps& caps,
                       int steps_per_unit, std::uint64_t run_key);

/// count independent replicates; replicate i uses substream (seed, i).
/// Deterministic for any thread count.
std::vector<RunResult> run_batch(const StableParams& params, const OffspringLaw& law,
                                 const SimCaps& caps, int steps_per_unit, std::int64_t count,
                                 std::uint64_t seed, int threads = 0);

/// Number of particles alive at time t in the movement-free branching
/// process (event-driven; no paths, no positions).
std::int64_t population_at(const OffspringLaw& law, double t, SplitMix64& g);

/// Monte Carlo estimate of P(Z(t) >= 1) over reps movement-free runs.
double survival_estimate(const OffspringLaw& law, double t, std::int64_t reps, std::uint64_t seed,
                         int threads = 0);

}  // namespace bse
