#ifndef TAVIE_ORACLE_HPP
#define TAVIE_ORACLE_HPP

#include <cstdint>
#include <string>

#include "tavie/bqr.hpp"
#include "tavie/tavie_core.hpp"

namespace tavie {

/// Posterior moments computed by direct grid integration of the working
/// likelihood composed with the prior; deliberately independent of the
/// closed-form hyperparameter updates.  Restricted to p = 1 and n <= 3.
struct QuadratureMoments {
  double mean_beta = 0.0;
  double var_beta = 0.0;
  double mean_tau2 = 0.0;  // NaN when the scale is not a model parameter
};

/// Heavy-tailed (Normal-Gamma) case: trapezoidal integration over (beta, tau2).
/// The beta grid spans prior mean +/- 12 prior sd; tau2 spans [0, mean + 12 sd]
/// of the prior Gamma.  Throws QuadratureError when more than 1e-8 of the
/// posterior mass sits on the grid boundary.
QuadratureMoments quadrature_posterior_moments(const SsgFamily& family,
                                               const Dataset& data,
                                               const NormalGammaParams& prior,
                                               double alpha,
                                               const Eigen::VectorXd& xi,
                                               int grid_points = 2001);

/// Count model (Gaussian prior) case: 1-D integration over beta.
QuadratureMoments quadrature_posterior_moments(const SsgFamily& family,
                                               const Dataset& data,
                                               const GaussianParams& prior,
                                               double alpha,
                                               const Eigen::VectorXd& xi,
                                               int grid_points = 2001);

/// Quantile regression case: 1-D integration over beta.
QuadratureMoments quadrature_posterior_moments(const Dataset& data,
                                               const GaussianParams& prior,
                                               const BQRConfig& cfg,
                                               const Eigen::VectorXd& xi,
                                               int grid_points = 2001);

/// Central finite differences of the profile objective, recomputing the
/// posterior at every perturbed xi.  Throws DomainError when xi_i - step
/// would cross the singularity floor.
Eigen::VectorXd fd_gradient(const VariationalState& state, const Dataset& data,
                            double step = 1e-5);

/// Average per-observation Renyi divergence of order alpha between two
/// Laplace regression likelihoods with rates tau and tau_ref.
double renyi_laplace(const Eigen::VectorXd& beta, double tau,
                     const Eigen::VectorXd& beta_ref, double tau_ref,
                     const Eigen::MatrixXd& X, double alpha);

/// Same for two Negative-Binomial regression likelihoods with shared sizes m.
double renyi_negbin(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_ref,
                    const Eigen::MatrixXd& X, const Eigen::VectorXd& m,
                    double alpha);

enum class RiskModel { Laplace, NegBin };

/// One replication of the risk-bound experiment: simulate, fit, Monte-Carlo
/// average (1-alpha) * D_alpha over posterior draws, and evaluate the bound.
struct RiskGapReport {
  std::string model;
  double lhs = 0.0;    // MC estimate of (1-alpha) * integrated divergence
  double rhs = 0.0;    // bound value
  double gap = 0.0;    // rhs - lhs
  double alpha = 0.0;
  double mc_se = 0.0;  // MC standard error of lhs
  int n = 0;
  int p = 0;
  int n_mc = 0;
};

RiskGapReport risk_gap(RiskModel model, int n, int p, double alpha,
                       std::uint64_t seed, int n_mc);

/// k-th absolute moment of the density proportional to exp{h(s^2)},
/// normalized by its mass; evaluated by 1-D quadrature.
double ssg_absolute_moment(const SsgFamily& family, int k);

/// Numerical stand-in for the curvature bound: sup of h'' over the
/// log-spaced grid t in [1e-4, 1e4].
double ssg_curvature_bound(const SsgFamily& family);

}  // namespace tavie

#endif  // TAVIE_ORACLE_HPP
