#include <cmath>
#include <vector>

#include <doctest.h>

#include "bse/asymptotics.hpp"
#include "bse/rng.hpp"

using namespace bse;

namespace {

TabulatedFn power_law(double c, double exponent, double x1, double xmax, int pts) {
  TabulatedFn f;
  f.xs = geometric_grid(x1, xmax, pts);
  f.ys.resize(pts);
  f.ys[0] = 1.0;
  for (Eigen::Index i = 1; i < pts; ++i) f.ys[i] = c * std::pow(f.xs[i], exponent);
  return f;
}

}  // namespace

TEST_CASE("theoretical tail targets") {
  const StableParams p = validate_params(1.5, 0.0);
  const OffspringLaw binary = make_offspring_law({0.5, 0.0, 0.5});
  const OffspringLaw sub = make_offspring_law({0.6, 0.0, 0.4});

  const TailTarget crit = theoretical_tail(p, binary);
  CHECK(crit.regime == Regime::Critical);
  CHECK(crit.exponent == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(crit.constant == doctest::Approx(std::sqrt(2.0 * p.kappa)).epsilon(1e-14));

  const TailTarget s = theoretical_tail(p, sub);
  CHECK(s.regime == Regime::Subcritical);
  CHECK(s.exponent == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(s.constant == doctest::Approx(p.kappa / 0.2).epsilon(1e-12));

  // scale consistency in kappa: x2 subcritical, sqrt(2) critical
  const TailTarget crit2 = tail_target_from(2.0 * p.kappa, p.alpha, binary);
  CHECK(crit2.constant == doctest::Approx(std::sqrt(2.0) * crit.constant).epsilon(1e-13));
  const TailTarget sub2 = tail_target_from(2.0 * p.kappa, p.alpha, sub);
  CHECK(sub2.constant == doctest::Approx(2.0 * s.constant).epsilon(1e-13));

  // under the Lalley-Shao normalization kappa = 1/alpha the critical
  // constant becomes sqrt(2/alpha)
  const TailTarget ls = tail_target_from(1.0 / p.alpha, p.alpha, binary);
  CHECK(ls.constant == doctest::Approx(std::sqrt(2.0 / p.alpha)).epsilon(1e-14));
}

TEST_CASE("fit_tail recovers exact power laws to machine precision") {
  const TabulatedFn f = power_law(2.0, -0.75, 1.0, 1000.0, 60);
  const FitResult fit = fit_tail(f, 1.0, 1000.0);
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(fit.constant() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.stderr_slope < 1e-12);
  CHECK(fit.points >= 10);

  CHECK_THROWS_AS(fit_tail(f, 1.0, 1.2), std::invalid_argument);  // too few points

  TabulatedFn with_zero = f;
  with_zero.ys[30] = 0.0;
  CHECK_THROWS_AS(fit_tail(with_zero, 1.0, 1000.0), std::invalid_argument);
}

TEST_CASE("eta_alpha comparison functions") {
  CHECK(eta_alpha(validate_params(1.0, 0.0), 0.01) ==
        doctest::Approx(4.60517018598809136).epsilon(1e-14));
  CHECK(eta_alpha(validate_params(0.5, 0.0), 1.0) ==
        doctest::Approx(1.77245385090551603).epsilon(1e-14));
  CHECK(eta_alpha(validate_params(1.5, 0.0), 1.0) ==
        doctest::Approx(1.77245385090551603).epsilon(1e-14));
  // small-lambda growth: alpha<1 like lambda^{alpha-1}
  const StableParams p = validate_params(0.5, 0.0);
  CHECK(eta_alpha(p, 1e-4) / eta_alpha(p, 1e-2) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(eta_alpha(p, 0.0), std::invalid_argument);
}

TEST_CASE("numerical Laplace transform") {
  SUBCASE("constant function integrates to 1/lambda") {
    TabulatedFn one;
    one.xs = geometric_grid(0.001, 60.0, 400);
    one.ys = Eigen::ArrayXd::Ones(400);
    const LaplaceResult r = laplace_numeric(one, 1.0, 0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_FALSE(r.flagged);
  }

  SUBCASE("exponential decay halves under lambda = 1") {
    TabulatedFn f;
    f.xs = geometric_grid(0.001, 50.0, 600);
    f.ys.resize(600);
    for (Eigen::Index i = 0; i < 600; ++i) f.ys[i] = std::exp(-f.xs[i]);
    const LaplaceResult r = laplace_numeric(f, 1.0, 0);
    CHECK(r.value == doctest::Approx(0.5).epsilon(2e-3));
  }

  SUBCASE("first moment of e^{-x} under lambda = 1 is 1/4") {
    TabulatedFn f;
    f.xs = geometric_grid(0.001, 50.0, 600);
    f.ys.resize(600);
    for (Eigen::Index i = 0; i < 600; ++i) f.ys[i] = std::exp(-f.xs[i]);
    const LaplaceResult r = laplace_numeric(f, 1.0, 1);
    CHECK(r.value == doctest::Approx(0.25).epsilon(2e-3));
  }

  SUBCASE("power-law tail extension carries the small-lambda integral and is flagged") {
    // f = x^{-1/2} beyond x1: L[f](lambda) = sqrt(pi/lambda) as lambda -> 0
    const TabulatedFn f = power_law(1.0, -0.5, 0.01, 1000.0, 400);
    const double lambda = 1e-5;
    const LaplaceResult r = laplace_numeric(f, lambda, 0);
    CHECK(r.flagged);
    CHECK(r.tail_fraction > 0.5);
    CHECK(r.value == doctest::Approx(std::sqrt(std::acos(-1.0) / lambda)).epsilon(0.03));
  }

  SUBCASE("input validation") {
    const TabulatedFn f = power_law(1.0, -0.5, 0.01, 10.0, 50);
    CHECK_THROWS_AS(laplace_numeric(f, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(laplace_numeric(f, 1.0, 2), std::invalid_argument);
    TabulatedFn neg = f;
    neg.ys[3] = -0.5;
    CHECK_THROWS_AS(laplace_numeric(neg, 1.0, 0), std::invalid_argument);
  }
}

TEST_CASE("kolmogorov ratio") {
  const OffspringLaw binary = make_offspring_law({0.5, 0.0, 0.5});
  // feeding the exact asymptote gives exactly 1
  const double t = 123.0;
  CHECK(kolmogorov_ratio(binary, t, 2.0 / (binary.sigma2 * t)) == doctest::Approx(1.0));
  const OffspringLaw sub = make_offspring_law({0.6, 0.0, 0.4});
  CHECK_THROWS_AS(kolmogorov_ratio(sub, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("a-priori bound check") {
  const StableParams p = validate_params(1.5, 0.0);
  // exact c x^{-alpha/2}: product is constant, slope 0
  CHECK(apriori_bound_check(power_law(3.0, -0.75, 1.0, 1000.0, 80), p, 2.0));
  // slope -alpha/4: product grows like x^{alpha/4}
  CHECK_FALSE(apriori_bound_check(power_law(3.0, -0.375, 1.0, 1000.0, 80), p, 2.0));
  // window too short
  CHECK_THROWS_AS(apriori_bound_check(power_law(3.0, -0.75, 1.0, 1000.0, 80), p, 900.0),
                  std::invalid_argument);
  // subcritical-regime guard: requires alpha > 1
  CHECK_THROWS_AS(apriori_bound_check(power_law(3.0, -0.75, 1.0, 1000.0, 80),
                                      validate_params(0.5, 0.0), 2.0),
                  std::invalid_argument);
}

TEST_CASE("sample tail fit with bootstrap errors") {
  // exact Pareto sample via inversion: P(X >= x) = x^{-2}
  const int n = 50'000;
  std::vector<double> x(n);
  SplitMix64 g(777);
  for (int i = 0; i < n; ++i) x[i] = std::pow(uniform_open(g), -0.5);

  const auto [lo, hi] = quantile_window(x, 0.9, 0.999);
  const TailFitSummary fit = fit_sample_tail(x, lo, hi, 200, 5);
  CHECK(-fit.fit.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.fit.constant() == doctest::Approx(1.0).epsilon(0.25));
  CHECK(fit.slope_stderr_boot > 0.0);
  CHECK(fit.slope_stderr_boot < 0.2);
  CHECK(fit.resamples > 150);
  // the point estimate should sit within a few bootstrap errors of truth
  CHECK(std::abs(-fit.fit.slope - 2.0) < 4.0 * fit.slope_stderr_boot + 0.02);
}
