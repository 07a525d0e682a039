#ifndef TAVIE_DATASET_HPP
#define TAVIE_DATASET_HPP

#include <optional>

#include <Eigen/Core>

#include "tavie/errors.hpp"

namespace tavie {

/// Regression data (X, y) with optional per-observation count sizes m.
/// Every row of X must be non-zero; the EM fixed point map degenerates on
/// all-zero rows.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> m;

  Dataset() = default;
  Dataset(Eigen::MatrixXd X_, Eigen::VectorXd y_,
          std::optional<Eigen::VectorXd> m_ = std::nullopt);

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

}  // namespace tavie

#endif  // TAVIE_DATASET_HPP
