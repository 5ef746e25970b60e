#include "bse/fixed_point_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "bse/parallel.hpp"

namespace bse {

namespace {

void require_solver_grid(const Eigen::ArrayXd& grid) {
  if (grid.size() < 3) throw std::invalid_argument("solver grid: need at least 3 nodes");
  if (grid[0] != 0.0) throw std::invalid_argument("solver grid: must start at 0");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("solver grid: must be strictly increasing");
}

void require_solution_shape(const TabulatedFn& u) {
  check_grid(u);
  constexpr double eps = 1e-9;
  for (Eigen::Index i = 0; i < u.ys.size(); ++i)
    if (u.ys[i] < -eps || u.ys[i] > 1.0 + eps)
      throw std::invalid_argument("expected a [0,1]-valued solver output");
  for (Eigen::Index i = 1; i < u.ys.size(); ++i)
    if (u.ys[i] > u.ys[i - 1] + eps)
      throw std::invalid_argument("expected a non-increasing solver output");
}

}  // namespace

CloudGridTables::CloudGridTables(const ExpPairCloud& cloud, const Eigen::ArrayXd& grid,
                                 int threads) {
  require_solver_grid(grid);
  n_ = cloud.size();
  if (n_ < 1) throw std::invalid_argument("cloud must be non-empty");

  // sort samples by s so that {s_j < x_i} is a prefix
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return cloud.s[a] < cloud.s[b]; });
  std::vector<double> s_sorted(order.size()), l_sorted(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    s_sorted[k] = cloud.s[order[k]];
    l_sorted[k] = cloud.l[order[k]];
  }

  const Eigen::Index g = grid.size();
  prefix_.resize(static_cast<std::size_t>(g));
  offsets_.assign(static_cast<std::size_t>(g) + 1, 0);
  for (Eigen::Index i = 0; i < g; ++i) {
    const auto it = std::lower_bound(s_sorted.begin(), s_sorted.end(), grid[i]);
    prefix_[static_cast<std::size_t>(i)] = it - s_sorted.begin();
    offsets_[static_cast<std::size_t>(i) + 1] =
        offsets_[static_cast<std::size_t>(i)] + prefix_[static_cast<std::size_t>(i)];
  }
  cells_.resize(static_cast<std::size_t>(offsets_.back()));

  // freeze the interpolation cell of x_i - l_j for every in-prefix pair
  parallel_for(g, threads, [&](std::int64_t ilo, std::int64_t ihi) {
    for (std::int64_t i = ilo; i < ihi; ++i) {
      const std::int64_t base = offsets_[static_cast<std::size_t>(i)];
      const std::int64_t cnt = prefix_[static_cast<std::size_t>(i)];
      for (std::int64_t j = 0; j < cnt; ++j) {
        const double y = grid[i] - l_sorted[static_cast<std::size_t>(j)];
        Cell c{0, 0.0f};
        if (y <= 0.0) {
          c = {0, 0.0f};  // u = 1 left of the grid; unreachable while s >= l
        } else if (y <= grid[1]) {
          c = {0, static_cast<float>(y / grid[1])};
        } else {
          const double* hi = std::upper_bound(grid.data() + 1, grid.data() + g, y);
          Eigen::Index k = (hi - grid.data()) - 1;
          if (k > g - 2) k = g - 2;  // past the last node: frac > 1 extends the segment
          c.idx = static_cast<std::int32_t>(k);
          c.frac = static_cast<float>(std::log(y / grid[k]) / std::log(grid[k + 1] / grid[k]));
        }
        cells_[static_cast<std::size_t>(base + j)] = c;
      }
    }
  });
}

std::vector<std::int64_t> CloudGridTables::thread_ranges(int threads) const {
  // split grid nodes so each worker sweeps roughly equal pair counts
  const int t = std::max(1, resolve_threads(threads));
  const Eigen::Index g = grid_size();
  const std::int64_t total = offsets_.back();
  std::vector<std::int64_t> bounds{0};
  for (int k = 1; k < t; ++k) {
    const std::int64_t target = total * k / t;
    const auto it = std::lower_bound(offsets_.begin(), offsets_.end(), target);
    std::int64_t i = it - offsets_.begin();
    if (i > g) i = g;
    if (i < bounds.back()) i = bounds.back();
    bounds.push_back(i);
  }
  bounds.push_back(g);
  return bounds;
}

void CloudGridTables::apply_map(const OffspringLaw& law, const Eigen::ArrayXd& ys,
                                Eigen::ArrayXd& out, int threads) const {
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double* probs = law.probs.data();
  const std::size_t np = law.probs.size();
  const auto bounds = thread_ranges(threads);

  parallel_for(static_cast<std::int64_t>(bounds.size()) - 1, static_cast<int>(bounds.size()) - 1,
               [&](std::int64_t blo, std::int64_t bhi) {
                 for (std::int64_t b = blo; b < bhi; ++b) {
                   for (std::int64_t i = bounds[b]; i < bounds[b + 1]; ++i) {
                     const std::int64_t lo = offsets_[static_cast<std::size_t>(i)];
                     const std::int64_t hi = offsets_[static_cast<std::size_t>(i) + 1];
                     double acc = 0.0;
                     for (std::int64_t p = lo; p < hi; ++p) {
                       const double w = 1.0 - interpolate(ys, cells_[static_cast<std::size_t>(p)]);
                       double f = probs[np - 1];
                       for (std::size_t k = np - 1; k-- > 0;) f = probs[k] + w * f;
                       acc += f;
                     }
                     out[i] = 1.0 - acc * inv_n;
                   }
                 }
               });

  // the exact map preserves monotonicity and [0,1]; trim rounding noise
  out[0] = 1.0;
  for (Eigen::Index i = 1; i < out.size(); ++i) {
    if (out[i] > out[i - 1]) out[i] = out[i - 1];
    if (out[i] < 0.0) out[i] = 0.0;
  }
}

void CloudGridTables::power_sums(const Eigen::ArrayXd& ys, Eigen::ArrayXd moments[3],
                                 int threads) const {
  const Eigen::Index g = grid_size();
  for (int k = 0; k < 3; ++k) moments[k].setZero(g);
  const double inv_n = 1.0 / static_cast<double>(n_);
  const auto bounds = thread_ranges(threads);

  parallel_for(static_cast<std::int64_t>(bounds.size()) - 1, static_cast<int>(bounds.size()) - 1,
               [&](std::int64_t blo, std::int64_t bhi) {
                 for (std::int64_t b = blo; b < bhi; ++b) {
                   for (std::int64_t i = bounds[b]; i < bounds[b + 1]; ++i) {
                     const std::int64_t lo = offsets_[static_cast<std::size_t>(i)];
                     const std::int64_t hi = offsets_[static_cast<std::size_t>(i) + 1];
                     double a1 = 0.0, a2 = 0.0, a3 = 0.0;
                     for (std::int64_t p = lo; p < hi; ++p) {
                       const double v = interpolate(ys, cells_[static_cast<std::size_t>(p)]);
                       a1 += v;
                       a2 += v * v;
                       a3 += v * v * v;
                     }
                     moments[0][i] = a1 * inv_n;
                     moments[1][i] = a2 * inv_n;
                     moments[2][i] = a3 * inv_n;
                   }
                 }
               });
}

SolveResult solve_u_detailed(const OffspringLaw& law, const ExpPairCloud& cloud,
                             const Eigen::ArrayXd& grid, const SolveOptions& opts,
                             const CloudGridTables* tables) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1)
    throw std::invalid_argument("solve_u: tol must be > 0 and max_iter >= 1");

  std::optional<CloudGridTables> owned;
  if (!tables) owned.emplace(cloud, grid, opts.threads);
  const CloudGridTables& tab = tables ? *tables : *owned;

  const Eigen::Index g = grid.size();
  Eigen::ArrayXd ys(g), next(g);
  if (opts.start == SolveOptions::Start::FromOne) {
    ys.setOnes();
  } else {
    for (Eigen::Index i = 0; i < g; ++i) ys[i] = tab.survival(i);
  }

  double delta = 0.0, prev_delta = -1.0;
  double rho_window[3] = {0.0, 0.0, 0.0};
  int n_ratios = 0;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    tab.apply_map(law, ys, next, opts.threads);
    delta = (next - ys).abs().maxCoeff();
    ys.swap(next);

    if (delta == 0.0)
      return {TabulatedFn{grid, ys}, iter, 0.0, 0.0};
    if (prev_delta > 0.0) {
      rho_window[n_ratios % 3] = delta / prev_delta;
      ++n_ratios;
      const double rho = std::min(
          0.999999, *std::max_element(rho_window, rho_window + std::min(n_ratios, 3)));
      const double est = delta * rho / (1.0 - rho);
      if (rho < 1.0 && est < opts.tol)
        return {TabulatedFn{grid, ys}, iter, delta, est};
    }
    prev_delta = delta;
  }
  throw std::runtime_error("solve_u: no convergence within max_iter; last sup-norm delta = " +
                           std::to_string(delta));
}

TabulatedFn solve_u(const OffspringLaw& law, const ExpPairCloud& cloud,
                    const Eigen::ArrayXd& grid, double tol, int max_iter) {
  SolveOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return solve_u_detailed(law, cloud, grid, opts).u;
}

SandwichResult solve_sandwich(const OffspringLaw& law, const ExpPairCloud& cloud,
                              const Eigen::ArrayXd& grid, double tol, int max_iter, int threads) {
  const CloudGridTables tables(cloud, grid, threads);
  SolveOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.threads = threads;

  SandwichResult r;
  opts.start = SolveOptions::Start::FromOne;
  r.from_one = solve_u_detailed(law, cloud, grid, opts, &tables);
  opts.start = SolveOptions::Start::FromSurvival;
  r.from_survival = solve_u_detailed(law, cloud, grid, opts, &tables);
  r.gap = (r.from_one.u.ys - r.from_survival.u.ys).abs().maxCoeff();
  r.consistent = r.gap <= 2.0 * tol;
  return r;
}

TabulatedFn phi0_of(const TabulatedFn& u, const OffspringLaw& law) {
  require_solution_shape(u);
  return {u.xs, (1.0 - law.m) * u.ys + 0.5 * law.sigma2 * u.ys.square()};
}

ResidualReport residual_check(const TabulatedFn& u, const OffspringLaw& law,
                              const ExpPairCloud& cloud, double slack, int threads) {
  require_solution_shape(u);
  const CloudGridTables tables(cloud, u.xs, threads);

  Eigen::ArrayXd moments[3];
  tables.power_sums(u.ys, moments, threads);

  const Eigen::Index g = u.xs.size();
  ResidualReport rep;
  rep.slack = slack;
  rep.residual = {u.xs, Eigen::ArrayXd(g)};
  rep.bound = {u.xs, Eigen::ArrayXd(g)};
  rep.ok = true;
  for (Eigen::Index i = 0; i < g; ++i) {
    const double phi0 = (1.0 - law.m) * moments[0][i] + 0.5 * law.sigma2 * moments[1][i];
    const double res = u.ys[i] - tables.survival(i) - moments[0][i] + phi0;
    const double bnd = law.m3 * moments[2][i];
    rep.residual.ys[i] = res;
    rep.bound.ys[i] = bnd;
    if (res < -slack || res > bnd + slack) rep.ok = false;
  }
  return rep;
}

}  // namespace bse
