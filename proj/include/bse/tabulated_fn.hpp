#pragma once

#include <Eigen/Core>

namespace bse {

/// A function tabulated on a strictly increasing grid. Solver outputs use
/// a grid starting at 0 with values that are non-increasing and confined
/// to [0,1]; survival curves and phi0 share the representation.
struct TabulatedFn {
  Eigen::ArrayXd xs;
  Eigen::ArrayXd ys;

  Eigen::Index size() const { return xs.size(); }
};

/// Grid {0, x1, ..., xmax} with points-1 geometrically spaced positive
/// nodes. Power-law tails get constant relative resolution this way.
Eigen::ArrayXd geometric_grid(double x1, double xmax, Eigen::Index points);

/// Throws std::invalid_argument unless xs is strictly increasing and sizes
/// match.
void check_grid(const TabulatedFn& f);

/// Evaluation rule shared by the solver and the Laplace quadrature:
/// piecewise linear in ln x between nodes, linear in x on a first cell
/// starting at 0, clamped to ys[0] left of the grid, and continued past
/// the last node along the last ln-x segment, floored at 0.
double eval_log_linear(const TabulatedFn& f, double x);

/// Empirical survival x -> #{v >= x}/n tabulated on the given grid.
/// Throws on an empty value set or a non-increasing grid.
TabulatedFn empirical_survival(const Eigen::ArrayXd& values, const Eigen::ArrayXd& grid);

/// Trapezoid integral of the tabulated function over its full grid span,
/// with the same interpolation rule as eval_log_linear (no tail extension).
double integral_tabulated(const TabulatedFn& f);

}  // namespace bse
