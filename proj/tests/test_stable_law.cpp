#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "bse/asymptotics.hpp"
#include "bse/experiment.hpp"
#include "bse/rng.hpp"
#include "bse/stable_law.hpp"
#include "bse/tabulated_fn.hpp"

using namespace bse;

namespace {

std::vector<double> draw(const StableParams& p, double dt, int n, std::uint64_t seed) {
  std::vector<double> out(n);
  const StableSampler s(p, dt);
  SplitMix64 g(seed);
  for (int i = 0; i < n; ++i) out[i] = s(g);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("admissible parameter set") {
  CHECK(validate_params(1.5, 0.0).c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(validate_params(0.5, 1.0).c ==
        doctest::Approx(0.707106781186547524).epsilon(1e-14));
  CHECK(validate_params(1.0, 0.0).c == 1.0);

  CHECK_THROWS_AS(validate_params(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(-0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(2.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(1.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(validate_params(1.5, 1.5), std::invalid_argument);

  // accept/reject over a parameter grid must match the admissibility rule
  for (double a = -0.25; a <= 2.25; a += 0.25) {
    for (double b = -1.25; b <= 1.25; b += 0.25) {
      const bool admissible =
          (a > 0.0 && a < 2.0 && a != 1.0 && b > -1.0 && b <= 1.0) || (a == 1.0 && b == 0.0);
      bool accepted = true;
      try {
        validate_params(a, b);
      } catch (const std::invalid_argument&) {
        accepted = false;
      }
      CAPTURE(a);
      CAPTURE(b);
      CHECK(accepted == admissible);
    }
  }
}

TEST_CASE("tail constants match the closed forms") {
  // independent high-precision evaluations of the kappa formulas
  CHECK(validate_params(1.0, 0.0).kappa ==
        doctest::Approx(0.318309886183790671537767526745).epsilon(1e-13));
  CHECK(validate_params(0.5, 1.0).kappa ==
        doctest::Approx(0.564189583547756286948079451561).epsilon(1e-12));
  CHECK(validate_params(1.5, 0.0).kappa ==
        doctest::Approx(0.199471140200716338969973029967).epsilon(1e-12));
  CHECK(validate_params(0.5, 0.0).kappa ==
        doctest::Approx(0.398942280401432677939946059934).epsilon(1e-12));
  CHECK(validate_params(0.5, 0.5).kappa ==
        doctest::Approx(0.521243208695838640049092255283).epsilon(1e-12));
  CHECK(validate_params(1.5, 0.5).kappa ==
        doctest::Approx(0.260621604347919320024546127641).epsilon(1e-12));
}

TEST_CASE("tail asymptote") {
  const StableParams p = validate_params(1.5, 0.0);
  CHECK(tail_asymptote(p, 1.0) == doctest::Approx(p.kappa).epsilon(1e-15));
  CHECK(tail_asymptote(p, 10.0) == doctest::Approx(p.kappa * std::pow(10.0, -1.5)));
  CHECK_THROWS_AS(tail_asymptote(p, 0.0), std::invalid_argument);

  const StableParams c = validate_params(1.0, 0.0);
  CHECK(tail_asymptote(c, 1.0) == doctest::Approx(1.0 / std::acos(-1.0)).epsilon(1e-14));
}

TEST_CASE("cauchy branch: symmetry and quartiles") {
  const StableParams p = validate_params(1.0, 0.0);
  const auto x = draw(p, 1.0, 100'000, 42);
  // median of a standard Cauchy is 0; 3*IQR/sqrt(n) with IQR = 2
  CHECK(std::abs(median(x)) < 3.0 * 2.0 / std::sqrt(100'000.0));
  // quartiles at -1 and 1
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted[sorted.size() / 4] == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(sorted[3 * sorted.size() / 4] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("subordinator branch never goes negative") {
  const StableParams p = validate_params(0.5, 1.0);
  const auto x = draw(p, 1.0, 100'000, 7);
  CHECK(*std::min_element(x.begin(), x.end()) >= 0.0);
  const auto y = draw(p, 0.1, 10'000, 8);
  CHECK(*std::min_element(y.begin(), y.end()) >= 0.0);
}

TEST_CASE("strict-stability scaling: dt^(1/alpha) rescales increments" *
          doctest::test_suite("slow")) {
  const StableParams p = validate_params(1.5, 0.0);
  const int n = 100'000;
  auto a = draw(p, 1.0, n, 11);
  auto b = draw(p, 3.0, n, 12);
  const double scale = std::pow(3.0, -1.0 / p.alpha);
  for (auto& v : b) v *= scale;
  const double d = ks_statistic(a, b);
  CHECK(d < ks_threshold(1e-3, n, n));
}

TEST_CASE("sampler tail matches kappa at the 0.999 quantile" * doctest::test_suite("slow")) {
  for (const auto& [alpha, beta] : {std::pair{1.5, 0.0}, std::pair{0.5, 1.0}}) {
    const StableParams p = validate_params(alpha, beta);
    const int n = 1'000'000;
    auto x = draw(p, 1.0, n, 99);
    std::sort(x.begin(), x.end());
    const double q = x[static_cast<std::size_t>(0.999 * (n - 1))];
    const double ratio = 0.001 * std::pow(q, p.alpha) / p.kappa;
    CAPTURE(alpha);
    CAPTURE(beta);
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.25);
  }
}

TEST_CASE("empirical tail exponent of |draws| is alpha" * doctest::test_suite("slow")) {
  const StableParams p = validate_params(1.5, 0.0);
  const int n = 1'000'000;
  auto x = draw(p, 1.0, n, 123);
  for (auto& v : x) v = std::abs(v);
  std::sort(x.begin(), x.end());
  // least squares on the log-log survival of the top 0.1%
  const double x_lo = x[static_cast<std::size_t>(0.999 * (n - 1))];
  const double x_hi = x[static_cast<std::size_t>(0.99999 * (n - 1))];
  const auto fit = fit_sample_tail(x, x_lo, x_hi, 0, 1);
  CHECK(-fit.fit.slope == doctest::Approx(p.alpha).epsilon(0.1 / p.alpha));
}
