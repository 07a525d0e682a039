#ifndef TAVIE_REPORT_IO_HPP
#define TAVIE_REPORT_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tavie/dataset.hpp"
#include "tavie/tavie_core.hpp"

namespace tavie {

/// Serializable view of a fit: the posterior plus enough configuration to
/// reproduce predictions from new data.
struct FitDocument {
  std::string model;  // laplace | student | logistic | binomial | negbin | quantile
  double alpha = 1.0;
  std::optional<int> nu;
  std::optional<double> tau0;
  std::optional<double> quantile;
  std::vector<std::string> feature_columns;
  std::optional<std::string> m_column;
  Posterior posterior;
  std::vector<double> elbo_trace;
  int iterations = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;
  double wall_time_s = 0.0;
};

nlohmann::json fit_document_to_json(const FitDocument& doc);
FitDocument fit_document_from_json(const nlohmann::json& j);

void write_fit_document(const std::string& path, const FitDocument& doc);
FitDocument read_fit_document(const std::string& path);
void write_fit_documents(const std::string& path, const std::vector<FitDocument>& docs);

/// Plug-in predictions at the posterior mean: X mu for the location-scale and
/// quantile models, m * sigmoid(X mu) for binomial counts (m = 1 for
/// logistic), m * (1 - s) / s for negative binomial counts.
Eigen::VectorXd predict(const FitDocument& doc, const Eigen::MatrixXd& X,
                        const std::optional<Eigen::VectorXd>& m = std::nullopt);

}  // namespace tavie

#endif  // TAVIE_REPORT_IO_HPP
