#pragma once

#include <cstdint>

#include "bse/rng.hpp"

namespace bse {

/// Admissible parameter pair of a strictly alpha-stable process with
/// positive jumps, plus the two constants derived from it: the
/// normalization c in the characteristic exponent
///
///   ln E[exp(i y L_t)] = -t c |y|^alpha (1 - i beta tan(pi alpha/2) sgn y),
///   c = cos(pi beta/2 * min(alpha, 2 - alpha)),
///
/// (for alpha = 1, beta = 0 the exponent is -t|y|) and the tail constant
/// kappa with P(L_1 >= x) ~ kappa x^{-alpha}.
struct StableParams {
  double alpha;
  double beta;
  double c;
  double kappa;
};

/// Validates (alpha, beta) and derives c and kappa. Admissible set:
/// alpha in (0,1)u(1,2) with beta in (-1,1], or alpha = 1 with beta = 0.
/// Throws std::invalid_argument otherwise.
StableParams validate_params(double alpha, double beta);

/// Tail constant for the c-normalized law:
///   (1/pi) Gamma(a) sin(pi a (1+b)/2)        a < 1
///   1/pi                                     a = 1
///   (1/pi) Gamma(a) sin(pi (a + a b - 2b)/2) a > 1
double kappa_constant(const StableParams& params);

/// kappa * x^{-alpha}, the leading tail term of P(L_1 >= x). Requires x > 0.
double tail_asymptote(const StableParams& params, double x);

/// Draws increments L_dt for a fixed step size. Precomputes the
/// Chambers-Mallows-Stuck constants once, so per-draw cost is a handful of
/// transcendentals. A standard skewed stable variate with characteristic
/// function exp(-|y|^a (1 - i b tan(pi a/2) sgn y)) is drawn from one
/// uniform and one exponential variate and rescaled by (c dt)^{1/a}; the
/// resulting law matches the characteristic exponent above exactly.
class StableSampler {
 public:
  StableSampler(const StableParams& params, double dt);

  double operator()(SplitMix64& g) const noexcept;

 private:
  bool cauchy_;          // alpha = 1, beta = 0
  double shift_;         // B_{a,b} = atan(b tan(pi a/2)) / a
  double scale_;         // (1 + b^2 tan^2(pi a/2))^{1/(2a)} * (c dt)^{1/a}
  double inv_alpha_;     // 1/a
  double exp_ratio_;     // (1-a)/a
  double alpha_;
};

/// One increment of duration dt (dt > 0). Convenience wrapper; prefer
/// constructing a StableSampler when drawing many increments of equal size.
double sample_increment(const StableParams& params, double dt, SplitMix64& g);

}  // namespace bse
