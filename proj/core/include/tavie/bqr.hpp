#ifndef TAVIE_BQR_HPP
#define TAVIE_BQR_HPP

#include "tavie/tavie_core.hpp"

namespace tavie {

/// Quantile regression setup: quantile level u, fixed asymmetric-Laplace
/// scale tau0, tempering alpha.  The scale is never estimated.
struct BQRConfig {
  double u = 0.5;
  double tau0 = 1.0;
  double alpha = 1.0;

  BQRConfig() = default;
  BQRConfig(double u_, double tau0_, double alpha_ = 1.0);
};

/// log of the asymmetric Laplace density 2*tau0*u*(1-u)*exp{-2*tau0*rho_u(x)}
/// with check loss rho_u(x) = x*(u - 1{x<0}).
double ald_logpdf(double x, double tau0, double u);

/// Gaussian posterior update for quantile regression:
///   Sigma_a^-1 = Sigma^-1 - 2*tau_a X' A(xi) X
///   mu_a = Sigma_a [Sigma^-1 mu - 2*tau_a X' A(xi) y + tau_a*(2u-1) X' 1]
/// with tau_a = tau0 * alpha.
GaussianParams update_bqr(const GaussianParams& prior, const Dataset& data,
                          const BQRConfig& cfg, const Eigen::VectorXd& xi);

/// EM loop for quantile regression; same contract as tavie::fit with the
/// quantile update and kappa_i = x_i' Sigma_a x_i + (y_i - x_i' mu_a)^2.
FitReport fit_bqr(const Dataset& data, const GaussianParams& prior,
                  const BQRConfig& cfg, const FitOptions& opts = {});

/// Laplace regression with the scale held fixed and a Gaussian prior over the
/// coefficients; an independent code path used to cross-check fit_bqr at
/// u = 1/2 (the two likelihoods coincide there).  xi lives on the scaled
/// residual tau0*(y - x'beta).
struct FixedScaleLaplaceFit {
  GaussianParams posterior;
  Eigen::VectorXd xi;
  int iterations = 0;
  bool converged = false;
};
FixedScaleLaplaceFit fit_laplace_fixed_scale(const Dataset& data,
                                             const GaussianParams& prior,
                                             double tau0, double alpha,
                                             const FitOptions& opts = {});

}  // namespace tavie

#endif  // TAVIE_BQR_HPP
