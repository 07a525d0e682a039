#include "tavie/basis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tavie {

void SplineSpec::validate() const {
  if (degree < 0) throw DomainError("SplineSpec: degree must be nonnegative");
  if (n_basis_x < degree + 1 || n_basis_y < degree + 1)
    throw DomainError("SplineSpec: need n_basis >= degree + 1");
  if (!(xmax > xmin) || !(ymax > ymin))
    throw DomainError("SplineSpec: degenerate domain");
}

namespace detail {

Eigen::VectorXd bspline_basis(int degree, int n_basis, double lo, double hi, double x) {
  // Clamped uniform knots: degree+1 copies at each end, uniform interior.
  const int n_knots = n_basis + degree + 1;
  std::vector<double> knots(static_cast<std::size_t>(n_knots));
  const int n_spans = n_basis - degree;  // interior intervals
  for (int i = 0; i < n_knots; ++i) {
    if (i <= degree) {
      knots[i] = lo;
    } else if (i >= n_basis) {
      knots[i] = hi;
    } else {
      knots[i] = lo + (hi - lo) * static_cast<double>(i - degree) / n_spans;
    }
  }

  x = std::clamp(x, lo, hi);
  // Locate the knot span [knots[s], knots[s+1]) containing x.
  int span = degree + static_cast<int>((x - lo) / (hi - lo) * n_spans);
  span = std::clamp(span, degree, n_basis - 1);
  while (span > degree && x < knots[span]) --span;
  while (span < n_basis - 1 && x >= knots[span + 1]) ++span;

  // Triangular recurrence for the degree+1 non-zero values on the span.
  std::vector<double> vals(static_cast<std::size_t>(degree) + 1, 0.0);
  std::vector<double> left(static_cast<std::size_t>(degree) + 1),
      right(static_cast<std::size_t>(degree) + 1);
  vals[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double tmp = denom != 0.0 ? vals[r] / denom : 0.0;
      vals[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    vals[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis);
  for (int j = 0; j <= degree; ++j) out[span - degree + j] = vals[j];
  return out;
}

}  // namespace detail

Eigen::VectorXd bspline_1d(const SplineSpec& spec, int axis, double x) {
  spec.validate();
  if (axis != 0 && axis != 1) throw DomainError("bspline_1d: axis must be 0 or 1");
  if (axis == 0)
    return detail::bspline_basis(spec.degree, spec.n_basis_x, spec.xmin, spec.xmax, x);
  return detail::bspline_basis(spec.degree, spec.n_basis_y, spec.ymin, spec.ymax, x);
}

Eigen::MatrixXd tensor_design(const Eigen::MatrixXd& coords, const SplineSpec& spec) {
  spec.validate();
  if (coords.cols() != 2) throw DomainError("tensor_design: coords must be n x 2");
  if (!coords.allFinite()) throw DomainError("tensor_design: coords must be finite");
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd design(n, spec.n_basis_x * spec.n_basis_y);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd bx = bspline_1d(spec, 0, coords(i, 0));
    const Eigen::VectorXd by = bspline_1d(spec, 1, coords(i, 1));
    for (int jx = 0; jx < spec.n_basis_x; ++jx)
      for (int jy = 0; jy < spec.n_basis_y; ++jy)
        design(i, jx * spec.n_basis_y + jy) = bx[jx] * by[jy];
  }
  return design;
}

}  // namespace tavie
