#include "bse/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bse/rng.hpp"

namespace bse {

namespace {

struct LinFit {
  double slope, intercept, stderr_slope;
};

LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    rss += r * r;
  }
  const double var = x.size() > 2 ? rss / (n - 2.0) : 0.0;
  return {slope, intercept, std::sqrt(var / sxx)};
}

/// Composite Simpson over a uniform grid of the integrand g on [a,b].
template <typename G>
double simpson(double a, double b, int panels, G&& g) {
  if (!(b > a)) return 0.0;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double acc = g(a) + g(b);
  for (int i = 1; i < panels; ++i) acc += g(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TailTarget tail_target_from(double kappa, double alpha, const OffspringLaw& law) {
  if (!(kappa > 0.0)) throw std::invalid_argument("tail target: kappa must be > 0");
  if (law.m > 1.0 + 1e-12)
    throw std::invalid_argument("tail target: supercritical laws are out of scope");
  if (law.critical()) {
    if (!(law.sigma2 > 0.0))
      throw std::invalid_argument("tail target: critical law needs sigma2 > 0");
    return {alpha / 2.0, std::sqrt(2.0 * kappa / law.sigma2), Regime::Critical};
  }
  return {alpha, kappa / (1.0 - law.m), Regime::Subcritical};
}

TailTarget theoretical_tail(const StableParams& params, const OffspringLaw& law) {
  return tail_target_from(params.kappa, params.alpha, law);
}

double FitResult::constant() const { return std::exp(intercept); }

FitResult fit_tail(const TabulatedFn& survival, double x_lo, double x_hi) {
  check_grid(survival);
  if (!(x_lo < x_hi)) throw std::invalid_argument("fit_tail: need x_lo < x_hi");
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i < survival.xs.size(); ++i) {
    const double x = survival.xs[i];
    if (x < x_lo || x > x_hi) continue;
    const double y = survival.ys[i];
    if (!(y > 0.0))
      throw std::invalid_argument("fit_tail: non-positive survival value inside the window");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  if (lx.size() < 10) throw std::invalid_argument("fit_tail: fewer than 10 usable points");
  const LinFit f = least_squares(lx, ly);
  return {f.slope, f.intercept, {x_lo, x_hi}, f.stderr_slope, static_cast<int>(lx.size())};
}

double eta_alpha(const StableParams& params, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("eta_alpha: lambda must be > 0");
  const double a = params.alpha;
  if (a < 1.0) return std::tgamma(1.0 - a) * std::pow(lambda, a - 1.0);
  if (a == 1.0) return -std::log(lambda);
  return std::tgamma(2.0 - a) * std::pow(lambda, a - 2.0);
}

LaplaceResult laplace_numeric(const TabulatedFn& f, double lambda, int moment) {
  check_grid(f);
  if (!(lambda > 0.0)) throw std::invalid_argument("laplace_numeric: lambda must be > 0");
  if (moment != 0 && moment != 1) throw std::invalid_argument("laplace_numeric: moment in {0,1}");
  for (Eigen::Index i = 0; i < f.ys.size(); ++i)
    if (f.ys[i] < -1e-12) throw std::invalid_argument("laplace_numeric: f must be non-negative");

  const Eigen::Index n = f.xs.size();
  const double xmax = f.xs[n - 1];

  LaplaceResult out;

  // power-law tail extension fitted on the solver-tail default window
  bool have_ext = false;
  double ext_slope = 0.0;
  const double f_end = std::max(0.0, f.ys[n - 1]);
  if (f_end > 0.0) {
    try {
      ext_slope = fit_tail(f, xmax / 20.0, xmax / 2.0).slope;
      have_ext = true;
    } catch (const std::invalid_argument&) {
      have_ext = false;  // no usable tail: truncate at xmax
    }
  }
  out.extension_slope = have_ext ? ext_slope : 0.0;

  const auto integrand_x = [&](double x) {
    const double fx = x <= xmax ? eval_log_linear(f, x)
                                : f_end * std::pow(x / xmax, ext_slope);
    return std::exp(-lambda * x) * (moment == 1 ? x : 1.0) * fx;
  };

  double core = 0.0;
  const double x_first = f.xs[0] == 0.0 ? f.xs[1] : f.xs[0];
  if (f.xs[0] == 0.0) core += simpson(0.0, x_first, 16, integrand_x);

  // bulk and extension in t = ln x; the integrand is smooth on that scale
  const auto integrand_t = [&](double t) {
    const double x = std::exp(t);
    return integrand_x(x) * x;
  };
  const auto log_quad = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    const int panels = std::max(64, static_cast<int>(std::ceil((b - a) / 0.002)));
    return simpson(a, b, panels, integrand_t);
  };

  core += log_quad(std::log(x_first), std::log(xmax));

  double ext = 0.0;
  if (have_ext) {
    const double x_up = std::max(xmax * 1.000001, 50.0 / lambda);
    ext = log_quad(std::log(xmax), std::log(x_up));
  }

  out.value = core + ext;
  out.tail_fraction = out.value > 0.0 ? ext / out.value : 0.0;
  out.flagged = out.tail_fraction > 0.5;
  return out;
}

double kolmogorov_ratio(const OffspringLaw& law, double t, double estimate) {
  if (!law.critical())
    throw std::invalid_argument("kolmogorov_ratio: meaningful for critical laws only");
  if (!(t > 0.0)) throw std::invalid_argument("kolmogorov_ratio: t must be > 0");
  return estimate * t * law.sigma2 / 2.0;
}

bool apriori_bound_check(const TabulatedFn& survival, const StableParams& params, double x_min) {
  check_grid(survival);
  if (!(params.alpha > 1.0))
    throw std::invalid_argument("apriori_bound_check: requires alpha > 1");
  if (!(x_min > 0.0)) throw std::invalid_argument("apriori_bound_check: x_min must be > 0");
  std::vector<double> lx, lp;
  for (Eigen::Index i = 0; i < survival.xs.size(); ++i) {
    const double x = survival.xs[i];
    if (x < x_min) continue;
    const double y = survival.ys[i];
    if (!(y > 0.0)) continue;
    lx.push_back(std::log(x));
    lp.push_back(std::log(y) + 0.5 * params.alpha * std::log(x));
  }
  if (lx.size() < 10) throw std::invalid_argument("apriori_bound_check: window too short");
  return least_squares(lx, lp).slope <= 0.05;
}

std::pair<double, double> quantile_window(const std::vector<double>& values, double q_lo,
                                          double q_hi) {
  if (values.size() < 2) throw std::invalid_argument("quantile_window: need at least 2 values");
  if (!(q_lo < q_hi) || !(q_lo >= 0.0) || !(q_hi <= 1.0))
    throw std::invalid_argument("quantile_window: need 0 <= q_lo < q_hi <= 1");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
    return sorted[idx];
  };
  return {pick(q_lo), pick(q_hi)};
}

TailFitSummary fit_sample_tail(const std::vector<double>& values, double x_lo, double x_hi,
                               int bootstrap_resamples, std::uint64_t seed, int fit_points) {
  if (fit_points < 10) throw std::invalid_argument("fit_sample_tail: need >= 10 fit points");
  const std::size_t n = values.size();
  if (n < 100) throw std::invalid_argument("fit_sample_tail: need at least 100 values");

  Eigen::ArrayXd grid(fit_points);
  const double step = std::log(x_hi / x_lo) / (fit_points - 1);
  for (int k = 0; k < fit_points; ++k) grid[k] = x_lo * std::exp(step * k);

  Eigen::ArrayXd vals = Eigen::Map<const Eigen::ArrayXd>(values.data(), n);
  const TabulatedFn surv = empirical_survival(vals, grid);

  TailFitSummary out;
  out.fit = fit_tail(surv, x_lo * (1.0 - 1e-12), x_hi * (1.0 + 1e-12));

  if (bootstrap_resamples > 0) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    // bucket of each sorted value: index of the last grid node <= value
    std::vector<std::int32_t> bucket(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::upper_bound(grid.data(), grid.data() + fit_points, sorted[i]);
      bucket[i] = static_cast<std::int32_t>(it - grid.data()) - 1;
    }

    SplitMix64 g(mix64(seed ^ 0x626f6f74ULL));
    std::vector<double> slopes, consts;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(fit_points) + 1, 0);
    for (int b = 0; b < bootstrap_resamples; ++b) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto d = static_cast<std::size_t>(g() % n);
        ++counts[static_cast<std::size_t>(bucket[d] + 1)];
      }
      // survival count at node k: draws whose bucket >= k
      std::vector<double> lx, ly;
      std::int64_t ge = 0;
      for (int k = fit_points; k-- > 0;) {
        ge += counts[static_cast<std::size_t>(k) + 1];
        if (ge > 0) {
          lx.push_back(std::log(grid[k]));
          ly.push_back(std::log(static_cast<double>(ge) / static_cast<double>(n)));
        }
      }
      if (lx.size() < 10) continue;
      const LinFit fr = least_squares(lx, ly);
      slopes.push_back(fr.slope);
      consts.push_back(std::exp(fr.intercept));
    }
    if (slopes.size() > 1) {
      const auto sd = [](const std::vector<double>& v) {
        double m = 0.0;
        for (const double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (const double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
      };
      out.slope_stderr_boot = sd(slopes);
      out.constant_stderr_boot = sd(consts);
      out.resamples = static_cast<int>(slopes.size());
    }
  }
  return out;
}

}  // namespace bse
