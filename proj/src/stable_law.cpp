#include "bse/stable_law.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bse {

namespace {
constexpr double kPi = std::numbers::pi;

[[noreturn]] void reject(double alpha, double beta, const char* why) {
  throw std::invalid_argument("inadmissible stable parameters (alpha=" + std::to_string(alpha) +
                              ", beta=" + std::to_string(beta) + "): " + why);
}
}  // namespace

StableParams validate_params(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) reject(alpha, beta, "non-finite");
  if (alpha <= 0.0 || alpha >= 2.0) reject(alpha, beta, "alpha must lie in (0,2)");
  if (alpha == 1.0) {
    if (beta != 0.0) reject(alpha, beta, "alpha=1 requires beta=0");
  } else {
    if (beta <= -1.0 || beta > 1.0) reject(alpha, beta, "beta must lie in (-1,1]");
  }

  StableParams p{alpha, beta, 1.0, 0.0};
  if (alpha != 1.0) p.c = std::cos(kPi * beta / 2.0 * std::min(alpha, 2.0 - alpha));
  p.kappa = kappa_constant(p);
  return p;
}

double kappa_constant(const StableParams& params) {
  const double a = params.alpha, b = params.beta;
  if (a < 1.0) return std::tgamma(a) * std::sin(kPi * a * (1.0 + b) / 2.0) / kPi;
  if (a == 1.0) return 1.0 / kPi;
  return std::tgamma(a) * std::sin(kPi * (a + a * b - 2.0 * b) / 2.0) / kPi;
}

double tail_asymptote(const StableParams& params, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("tail_asymptote requires x > 0");
  return params.kappa * std::pow(x, -params.alpha);
}

StableSampler::StableSampler(const StableParams& params, double dt)
    : cauchy_(params.alpha == 1.0),
      shift_(0.0),
      scale_(1.0),
      inv_alpha_(1.0 / params.alpha),
      exp_ratio_((1.0 - params.alpha) / params.alpha),
      alpha_(params.alpha) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment requires dt > 0");
  if (cauchy_) {
    scale_ = dt;  // L_dt = dt * Cauchy(1)
    return;
  }
  const double bt = params.beta * std::tan(kPi * params.alpha / 2.0);
  shift_ = std::atan(bt) / params.alpha;
  scale_ = std::pow(1.0 + bt * bt, 0.5 * inv_alpha_) * std::pow(params.c * dt, inv_alpha_);
}

double StableSampler::operator()(SplitMix64& g) const noexcept {
  const double u = kPi * (uniform_open(g) - 0.5);  // uniform on (-pi/2, pi/2)
  if (cauchy_) return scale_ * std::tan(u);
  const double w = exponential(g);
  const double au = alpha_ * (u + shift_);
  return scale_ * std::sin(au) * std::pow(std::cos(u), -inv_alpha_) *
         std::pow(std::cos(u - au) / w, exp_ratio_);
}

double sample_increment(const StableParams& params, double dt, SplitMix64& g) {
  return StableSampler(params, dt)(g);
}

}  // namespace bse
