#ifndef TAVIE_CONJUGATE_PRIORS_HPP
#define TAVIE_CONJUGATE_PRIORS_HPP

#include <cstdint>
#include <utility>

#include <Eigen/Core>

#include "tavie/errors.hpp"

namespace tavie {

/// Normal-Gamma hyperparameters: beta | tau2 ~ N(mu, Sigma / tau2) and
/// tau2 ~ Gamma(a/2, b/2) in the shape-rate convention.  The stored fields
/// are always (a, b), never the halved shape/rate.
struct NormalGammaParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  double a = 1.0;
  double b = 1.0;

  NormalGammaParams() = default;
  NormalGammaParams(Eigen::VectorXd mu_, Eigen::MatrixXd Sigma_, double a_, double b_);

  Eigen::Index dim() const { return mu.size(); }
};

struct GaussianParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;

  GaussianParams() = default;
  GaussianParams(Eigen::VectorXd mu_, Eigen::MatrixXd Sigma_);

  Eigen::Index dim() const { return mu.size(); }
};

/// Posterior point summary: (mu, a/b), the mean of the marginal Gamma.
std::pair<Eigen::VectorXd, double> ng_point_estimate(const NormalGammaParams& params);

/// k draws of beta, one per row; tau2 is drawn first for the Normal-Gamma
/// case.  Deterministic for a fixed seed.
Eigen::MatrixXd sample(const NormalGammaParams& params, int k, std::uint64_t seed);
Eigen::MatrixXd sample(const GaussianParams& params, int k, std::uint64_t seed);

/// Draws (beta, tau2) jointly; returns k x (p + 1) with tau2 in the last column.
Eigen::MatrixXd sample_joint(const NormalGammaParams& params, int k, std::uint64_t seed);

/// Equal-tailed marginal interval for one coordinate of beta.  Gaussian case
/// is exact via the normal quantile; the Normal-Gamma marginal is estimated
/// from simulation with a fixed internal seed.
std::pair<double, double> credible_interval(const GaussianParams& params,
                                            double level, Eigen::Index coord);
std::pair<double, double> credible_interval(const NormalGammaParams& params,
                                            double level, Eigen::Index coord);

/// Standard normal quantile (Acklam's rational approximation polished with
/// one Halley step; accurate to ~1e-15 over (0,1)).
double normal_quantile(double prob);

namespace detail {
/// Lower Cholesky factor of a symmetric PD matrix; throws InvariantError on
/// failure.  Shared by the parameter validators and the samplers.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& S, const char* context);
}  // namespace detail

}  // namespace tavie

#endif  // TAVIE_CONJUGATE_PRIORS_HPP
