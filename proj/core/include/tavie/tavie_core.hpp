#ifndef TAVIE_TAVIE_CORE_HPP
#define TAVIE_TAVIE_CORE_HPP

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tavie/conjugate_priors.hpp"
#include "tavie/dataset.hpp"
#include "tavie/ssg_family.hpp"

namespace tavie {

using Posterior = std::variant<NormalGammaParams, GaussianParams>;

/// Initialization of the variational parameter vector.
enum class XiInit { Ones, Residual };

struct FitOptions {
  double tol = 1e-9;       // l2 norm on successive xi vectors
  int max_iter = 10000;
  XiInit init = XiInit::Ones;
  bool record_trace = true;
};

/// Current variational parameters together with the posterior they induce.
/// The prior is carried along so the posterior can be recomputed at any xi
/// (profile objective evaluations, finite-difference checks).
struct VariationalState {
  SsgFamily family = SsgFamily::laplace();
  double alpha = 1.0;
  double tau0 = 1.0;  // fixed ALD scale; unused for other families
  Eigen::VectorXd xi;
  Posterior prior;
  Posterior posterior;
  std::optional<TypeIICoefficients> coeffs;  // TypeII only
};

struct FitReport {
  VariationalState state;
  std::vector<double> elbo_trace;
  int iterations = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;  // max_i |xi_i^2 - kappa_i(xi)| at exit
  double wall_time_s = 0.0;
};

/// Normal-Gamma hyperparameter update for the heavy-tailed families:
///   Sigma_a = [Sigma^-1 - 2a X' A(xi) X]^-1
///   mu_a    = Sigma_a [Sigma^-1 mu - 2a X' A(xi) y]
///   a_a     = a + n*alpha
///   b_a     = b - 2a y' A(xi) y + mu' Sigma^-1 mu - mu_a' Sigma_a^-1 mu_a
NormalGammaParams update_type1(const NormalGammaParams& prior, const Dataset& data,
                               const SsgFamily& family, double alpha,
                               const Eigen::VectorXd& xi);

/// Gaussian hyperparameter update for the count families:
///   Sigma_a^-1 = Sigma^-1 - 2a X' A(xi) diag(b) X
///   mu_a       = Sigma_a [Sigma^-1 mu + a X' (a_vec - b_vec/2)]
GaussianParams update_type2(const GaussianParams& prior, const Dataset& data,
                            const TypeIICoefficients& coeffs, double alpha,
                            const Eigen::VectorXd& xi);

/// Recomputes state.posterior from state.prior at state.xi (dispatches on the
/// family kind; the ALD branch applies the quantile regression update).
void refresh_posterior(VariationalState& state, const Dataset& data);

/// Posterior second moment of zeta_i under the current posterior.
Eigen::VectorXd kappa(const VariationalState& state, const Dataset& data);

/// Profile objective L(xi) up to additive constants that do not depend on xi;
/// traces are therefore only comparable within one fit.
double elbo(const VariationalState& state, const Dataset& data);

/// Analytic gradient of the profile objective; vanishes exactly at fixed
/// points xi^2 = kappa(xi).
Eigen::VectorXd elbo_gradient(const VariationalState& state, const Dataset& data);

/// EM loop: alternate the conjugate posterior update with xi <- sqrt(kappa)
/// until ||xi_t - xi_{t-1}||_2 <= tol or max_iter.  Non-convergence is
/// reported through the flag, never thrown.
FitReport fit(const SsgFamily& family, const Dataset& data,
              const NormalGammaParams& prior, double alpha,
              const FitOptions& opts = {});
FitReport fit(const SsgFamily& family, const Dataset& data,
              const GaussianParams& prior, double alpha,
              const FitOptions& opts = {});

namespace detail {

/// X' diag(w) X accumulated over fixed-size row blocks.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w);

/// Row-wise quadratic form q_i = x_i' S x_i, optionally thread-parallel.
/// Each entry is computed independently, so results do not depend on the
/// number of threads (TAVIE_THREADS; 0 or unset picks a default).
Eigen::VectorXd rowwise_quadform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S);

/// Gaussian posterior from a precision correction X' diag(c) X and an extra
/// linear term: Sigma_a = [Sigma^-1 - X' diag(c) X]^-1,
/// mu_a = Sigma_a (Sigma^-1 mu + extra_rhs).
GaussianParams gaussian_quadratic_update(const GaussianParams& prior,
                                         const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& c,
                                         const Eigen::VectorXd& extra_rhs);

/// log|S| from a Cholesky of S; throws NumericalError if S is not PD.
double logdet_pd(const Eigen::MatrixXd& S, const char* context);

/// Shared EM driver; `state` must hold a consistent prior/family/alpha setup.
FitReport run_em(VariationalState state, const Dataset& data,
                 const FitOptions& opts);

Eigen::VectorXd initial_xi(const VariationalState& state, const Dataset& data,
                           XiInit init);

int thread_budget();  // honours TAVIE_THREADS

}  // namespace detail

}  // namespace tavie

#endif  // TAVIE_TAVIE_CORE_HPP
