#include "tavie/bqr.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace tavie {

BQRConfig::BQRConfig(double u_, double tau0_, double alpha_)
    : u(u_), tau0(tau0_), alpha(alpha_) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("BQRConfig: u must lie in (0,1)");
  if (!(tau0 > 0.0)) throw DomainError("BQRConfig: tau0 must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("BQRConfig: alpha must lie in (0,1]");
}

double ald_logpdf(double x, double tau0, double u) {
  if (!(tau0 > 0.0)) throw DomainError("ald_logpdf: tau0 must be positive");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("ald_logpdf: u must lie in (0,1)");
  const double rho = x * (u - (x < 0.0 ? 1.0 : 0.0));
  return std::log(2.0 * tau0 * u * (1.0 - u)) - 2.0 * tau0 * rho;
}

GaussianParams update_bqr(const GaussianParams& prior, const Dataset& data,
                          const BQRConfig& cfg, const Eigen::VectorXd& xi) {
  if (xi.size() != data.n()) throw DomainError("update_bqr: xi length mismatch");
  const SsgFamily fam = SsgFamily::ald(cfg.u);
  const double tau_a = cfg.tau0 * cfg.alpha;
  const double skew = 2.0 * cfg.u - 1.0;
  Eigen::VectorXd c(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    c[i] = 2.0 * tau_a * a_coef(fam, std::max(xi[i], kXiFloor));
  const Eigen::VectorXd extra =
      data.X.transpose() *
      (Eigen::VectorXd::Constant(data.n(), tau_a * skew) - c.cwiseProduct(data.y));
  return detail::gaussian_quadratic_update(prior, data.X, c, extra);
}

FitReport fit_bqr(const Dataset& data, const GaussianParams& prior,
                  const BQRConfig& cfg, const FitOptions& opts) {
  BQRConfig checked(cfg.u, cfg.tau0, cfg.alpha);  // validate
  VariationalState state;
  state.family = SsgFamily::ald(checked.u);
  state.alpha = checked.alpha;
  state.tau0 = checked.tau0;
  state.prior = prior;
  state.xi = detail::initial_xi(state, data, opts.init);
  return detail::run_em(std::move(state), data, opts);
}

FixedScaleLaplaceFit fit_laplace_fixed_scale(const Dataset& data,
                                             const GaussianParams& prior,
                                             double tau0, double alpha,
                                             const FitOptions& opts) {
  if (!(tau0 > 0.0)) throw DomainError("fit_laplace_fixed_scale: tau0 must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("fit_laplace_fixed_scale: alpha must lie in (0,1]");
  if (!(opts.tol > 0.0)) throw DomainError("fit_laplace_fixed_scale: tol must be positive");

  const SsgFamily fam = SsgFamily::laplace();
  const double tau2 = tau0 * tau0;
  Eigen::VectorXd xi = opts.init == XiInit::Ones
                           ? Eigen::VectorXd::Ones(data.n())
                           : (tau0 * (data.y - data.X * prior.mu)).cwiseAbs().eval();
  xi = xi.cwiseMax(kXiFloor);

  FixedScaleLaplaceFit out;
  Eigen::VectorXd c(data.n());
  for (int t = 1; t <= opts.max_iter; ++t) {
    for (Eigen::Index i = 0; i < data.n(); ++i)
      c[i] = 2.0 * alpha * tau2 * a_coef(fam, std::max(xi[i], kXiFloor));
    const Eigen::VectorXd extra = -(data.X.transpose() * c.cwiseProduct(data.y));
    out.posterior = detail::gaussian_quadratic_update(prior, data.X, c, extra);

    const Eigen::VectorXd q = detail::rowwise_quadform(data.X, out.posterior.Sigma);
    const Eigen::VectorXd r = data.y - data.X * out.posterior.mu;
    Eigen::VectorXd xi_next =
        (tau2 * (q + r.cwiseProduct(r))).cwiseSqrt().cwiseMax(kXiFloor);
    const double delta = (xi_next - xi).norm();
    xi = std::move(xi_next);
    out.iterations = t;
    if (delta <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.xi = std::move(xi);
  return out;
}

}  // namespace tavie
