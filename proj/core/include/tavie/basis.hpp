#ifndef TAVIE_BASIS_HPP
#define TAVIE_BASIS_HPP

#include <Eigen/Core>

#include "tavie/errors.hpp"

namespace tavie {

/// Tensor-product B-spline design on a rectangle.  Knots are clamped and
/// uniform on each axis; basis counts must be at least degree + 1.
struct SplineSpec {
  int degree = 3;
  int n_basis_x = 5;
  int n_basis_y = 5;
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  void validate() const;
};

/// All n_basis values of the 1-D basis at x (axis 0 = x, 1 = y).  Points
/// outside the domain are clamped to the boundary.
Eigen::VectorXd bspline_1d(const SplineSpec& spec, int axis, double x);

/// Row i is the row-major flattening of the outer product of the two 1-D
/// evaluations at coords(i, 0), coords(i, 1); n x (n_basis_x * n_basis_y).
Eigen::MatrixXd tensor_design(const Eigen::MatrixXd& coords, const SplineSpec& spec);

namespace detail {
/// Cox-de Boor evaluation on a clamped uniform knot vector.
Eigen::VectorXd bspline_basis(int degree, int n_basis, double lo, double hi, double x);
}  // namespace detail

}  // namespace tavie

#endif  // TAVIE_BASIS_HPP
