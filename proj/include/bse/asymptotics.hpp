#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bse/branching_sim.hpp"
#include "bse/stable_law.hpp"
#include "bse/tabulated_fn.hpp"

namespace bse {

enum class Regime { Subcritical, Critical };

/// Right-hand side of the maximum's tail asymptotics:
///   subcritical  P(M >= x) ~ kappa/(1-m) x^{-alpha}
///   critical     P(M >= x) ~ sqrt(2 kappa / sigma2) x^{-alpha/2}
struct TailTarget {
  double exponent;
  double constant;
  Regime regime;
};

/// Target for an explicit tail constant (useful under a different
/// normalization of the driving process).
TailTarget tail_target_from(double kappa, double alpha, const OffspringLaw& law);

TailTarget theoretical_tail(const StableParams& params, const OffspringLaw& law);

/// Least-squares fit of log survival against log x over a window.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double stderr_slope = 0.0;
  int points = 0;

  /// exp(intercept): the implied power-law constant.
  double constant() const;
};

/// Fits on grid nodes inside [x_lo, x_hi]. Throws if fewer than 10 usable
/// points or any non-positive survival value inside the window.
FitResult fit_tail(const TabulatedFn& survival, double x_lo, double x_hi);

/// Comparison function of the small-lambda Laplace asymptotics:
///   Gamma(1-a) lambda^{a-1}   a < 1
///   -ln(lambda)               a = 1
///   Gamma(2-a) lambda^{a-2}   a > 1   (probe for the x-weighted transform)
double eta_alpha(const StableParams& params, double lambda);

/// Numerical Laplace transform of a tabulated non-negative function:
/// integral of exp(-lambda x) x^moment f(x) dx, with log-linear
/// interpolation on the grid and a fitted power-law extension beyond the
/// last node. A tail extension carrying more than half the integral is
/// flagged (expected for very small lambda), not fatal.
struct LaplaceResult {
  double value = 0.0;
  double tail_fraction = 0.0;
  bool flagged = false;
  double extension_slope = 0.0;

  operator double() const { return value; }
};
LaplaceResult laplace_numeric(const TabulatedFn& f, double lambda, int moment = 0);

/// estimate * t * sigma2 / 2, which tends to 1 under Kolmogorov's
/// survival asymptotics P(Z(t) >= 1) ~ 2/(sigma2 t). Critical laws only.
double kolmogorov_ratio(const OffspringLaw& law, double t, double estimate);

/// True iff survival(x) x^{alpha/2} stays bounded over [x_min, grid end]:
/// the log-log slope of the product must not exceed 0.05. Requires
/// alpha > 1 and at least 10 positive points in the window.
bool apriori_bound_check(const TabulatedFn& survival, const StableParams& params, double x_min);

/// Empirical [q_lo, q_hi] quantile window of a sample (order statistics).
std::pair<double, double> quantile_window(const std::vector<double>& values, double q_lo,
                                          double q_hi);

/// Log-log tail fit of a raw sample over its [q(0.99), q(0.9999)] window
/// (or a supplied one), with bootstrap standard errors for the slope and
/// constant from B resamples.
struct TailFitSummary {
  FitResult fit;
  double slope_stderr_boot = 0.0;
  double constant_stderr_boot = 0.0;
  int resamples = 0;
};
TailFitSummary fit_sample_tail(const std::vector<double>& values, double x_lo, double x_hi,
                               int bootstrap_resamples = 200, std::uint64_t seed = 1,
                               int fit_points = 24);

}  // namespace bse
