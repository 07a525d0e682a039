#include "tavie/dataset.hpp"

#include <string>

namespace tavie {

Dataset::Dataset(Eigen::MatrixXd X_, Eigen::VectorXd y_,
                 std::optional<Eigen::VectorXd> m_)
    : X(std::move(X_)), y(std::move(y_)), m(std::move(m_)) {
  if (X.rows() < 1 || X.cols() < 1)
    throw InvariantError("Dataset: need n >= 1 and p >= 1");
  if (y.size() != X.rows())
    throw InvariantError("Dataset: X and y row counts disagree");
  if (m && m->size() != X.rows())
    throw InvariantError("Dataset: X and m row counts disagree");
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (X.row(i).cwiseAbs().maxCoeff() == 0.0)
      throw InvariantError("Dataset: design row " + std::to_string(i) + " is all zero");
  }
}

}  // namespace tavie
