#include "bse/tabulated_fn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bse {

Eigen::ArrayXd geometric_grid(double x1, double xmax, Eigen::Index points) {
  if (!(x1 > 0.0) || !(xmax > x1) || points < 3)
    throw std::invalid_argument("geometric_grid: need 0 < x1 < xmax and points >= 3");
  Eigen::ArrayXd xs(points);
  xs[0] = 0.0;
  const double step = std::log(xmax / x1) / static_cast<double>(points - 2);
  for (Eigen::Index i = 1; i < points; ++i)
    xs[i] = x1 * std::exp(step * static_cast<double>(i - 1));
  xs[points - 1] = xmax;
  return xs;
}

void check_grid(const TabulatedFn& f) {
  if (f.xs.size() != f.ys.size() || f.xs.size() < 2)
    throw std::invalid_argument("tabulated function: sizes mismatch or fewer than 2 nodes");
  for (Eigen::Index i = 1; i < f.xs.size(); ++i)
    if (!(f.xs[i] > f.xs[i - 1]))
      throw std::invalid_argument("tabulated function: grid must be strictly increasing");
}

double eval_log_linear(const TabulatedFn& f, double x) {
  const Eigen::Index n = f.xs.size();
  if (x <= f.xs[0]) return f.ys[0];
  const Eigen::Index first_pos = (f.xs[0] == 0.0) ? 1 : 0;
  if (first_pos == 1 && x <= f.xs[1]) {
    const double t = x / f.xs[1];
    return f.ys[0] + t * (f.ys[1] - f.ys[0]);
  }
  if (x >= f.xs[n - 1]) {
    // continue the last segment in ln x, floored at 0
    const double slope =
        (f.ys[n - 1] - f.ys[n - 2]) / std::log(f.xs[n - 1] / f.xs[n - 2]);
    const double v = f.ys[n - 1] + slope * std::log(x / f.xs[n - 1]);
    return std::max(0.0, v);
  }
  const double* lo = std::upper_bound(f.xs.data() + first_pos, f.xs.data() + n, x);
  const Eigen::Index i = (lo - f.xs.data()) - 1;  // xs[i] <= x < xs[i+1]
  const double t = std::log(x / f.xs[i]) / std::log(f.xs[i + 1] / f.xs[i]);
  return f.ys[i] + t * (f.ys[i + 1] - f.ys[i]);
}

TabulatedFn empirical_survival(const Eigen::ArrayXd& values, const Eigen::ArrayXd& grid) {
  if (values.size() == 0) throw std::invalid_argument("empirical_survival: empty value set");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("empirical_survival: grid must be strictly increasing");

  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  TabulatedFn out{grid, Eigen::ArrayXd(grid.size())};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), grid[i]);
    out.ys[i] = static_cast<double>(sorted.end() - it) / n;
  }
  return out;
}

double integral_tabulated(const TabulatedFn& f) {
  check_grid(f);
  double acc = 0.0;
  for (Eigen::Index i = 1; i < f.xs.size(); ++i)
    acc += 0.5 * (f.ys[i] + f.ys[i - 1]) * (f.xs[i] - f.xs[i - 1]);
  return acc;
}

}  // namespace bse
