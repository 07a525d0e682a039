#include "tavie/oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tavie/data_bench.hpp"

namespace tavie {

namespace {

constexpr double kBoundaryMassTol = 1e-8;

void check_tiny(const Dataset& data) {
  if (data.p() != 1 || data.n() > 3)
    throw DomainError("quadrature: only p = 1 and n <= 3 are supported");
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  if (x == 0.0)
    return shape > 1.0 ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::quiet_NaN();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

struct Grid {
  Eigen::VectorXd nodes;
  double step;
};

Grid linear_grid(double lo, double hi, int points) {
  Grid g;
  g.nodes = Eigen::VectorXd::LinSpaced(points, lo, hi);
  g.step = (hi - lo) / (points - 1);
  return g;
}

// Trapezoid weights on a uniform grid.
double trap_weight(int i, int points) { return (i == 0 || i == points - 1) ? 0.5 : 1.0; }

double log_sigmoid(double t) {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

}  // namespace

QuadratureMoments quadrature_posterior_moments(const SsgFamily& family,
                                               const Dataset& data,
                                               const NormalGammaParams& prior,
                                               double alpha,
                                               const Eigen::VectorXd& xi,
                                               int grid_points) {
  check_tiny(data);
  if (!family.is_type1())
    throw DomainError("quadrature: Normal-Gamma prior requires a location-scale family");
  if (xi.size() != data.n()) throw DomainError("quadrature: xi length mismatch");
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("quadrature: alpha out of range");

  const double mu0 = prior.mu[0];
  const double s0 = std::sqrt(prior.Sigma(0, 0) * prior.b / prior.a);
  const Grid bg = linear_grid(mu0 - 12.0 * s0, mu0 + 12.0 * s0, grid_points);
  const double t_mean = prior.a / prior.b;
  const double t_sd = std::sqrt(2.0 * prior.a) / prior.b;
  const Grid tg = linear_grid(0.0, t_mean + 12.0 * t_sd, grid_points);

  const double sigma_inv = 1.0 / prior.Sigma(0, 0);

  // log integrand on the grid, normalized by its maximum before exponentiating.
  Eigen::MatrixXd logf(grid_points, grid_points);
  double logmax = -std::numeric_limits<double>::infinity();
  for (int a_i = 0; a_i < grid_points; ++a_i) {
    const double beta = bg.nodes[a_i];
    for (int b_i = 0; b_i < grid_points; ++b_i) {
      const double tau2 = tg.nodes[b_i];
      double lf;
      if (tau2 <= 0.0) {
        lf = -std::numeric_limits<double>::infinity();
      } else {
        Theta theta{Eigen::VectorXd::Constant(1, beta), tau2};
        double work = 0.0;
        if (alpha > 0.0) {
          for (Eigen::Index i = 0; i < data.n(); ++i)
            work += log_minorizer(family, data.X.row(i).transpose(), data.y[i],
                                  theta, std::max(xi[i], kXiFloor));
          work *= alpha;
        }
        const double d = beta - mu0;
        const double log_prior =
            0.5 * std::log(tau2 * sigma_inv) - 0.5 * std::log(2.0 * M_PI) -
            0.5 * tau2 * sigma_inv * d * d +
            log_gamma_pdf(tau2, 0.5 * prior.a, 0.5 * prior.b);
        lf = work + log_prior;
      }
      logf(a_i, b_i) = lf;
      if (lf > logmax) logmax = lf;
    }
  }

  double mass = 0.0, edge = 0.0;
  double m_beta = 0.0, m_beta2 = 0.0, m_tau2 = 0.0;
  for (int a_i = 0; a_i < grid_points; ++a_i) {
    const double wb = trap_weight(a_i, grid_points);
    for (int b_i = 0; b_i < grid_points; ++b_i) {
      const double w = wb * trap_weight(b_i, grid_points);
      const double f = std::exp(logf(a_i, b_i) - logmax) * w;
      mass += f;
      m_beta += f * bg.nodes[a_i];
      m_beta2 += f * bg.nodes[a_i] * bg.nodes[a_i];
      m_tau2 += f * tg.nodes[b_i];
      if (a_i == 0 || a_i == grid_points - 1 || b_i == grid_points - 1) edge += f;
    }
  }
  if (mass <= 0.0) throw QuadratureError("quadrature: integrand vanished on the grid");
  if (edge / mass > kBoundaryMassTol)
    throw QuadratureError("quadrature: boundary mass exceeds tolerance");

  QuadratureMoments out;
  out.mean_beta = m_beta / mass;
  out.var_beta = m_beta2 / mass - out.mean_beta * out.mean_beta;
  out.mean_tau2 = m_tau2 / mass;
  return out;
}

namespace {

QuadratureMoments beta_line_integral(const GaussianParams& prior, int grid_points,
                                     const std::function<double(double)>& log_work) {
  const double mu0 = prior.mu[0];
  const double s0 = std::sqrt(prior.Sigma(0, 0));
  const Grid bg = linear_grid(mu0 - 12.0 * s0, mu0 + 12.0 * s0, grid_points);
  const double sigma_inv = 1.0 / prior.Sigma(0, 0);

  Eigen::VectorXd logf(grid_points);
  double logmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double beta = bg.nodes[i];
    const double d = beta - mu0;
    logf[i] = log_work(beta) - 0.5 * sigma_inv * d * d;
    if (logf[i] > logmax) logmax = logf[i];
  }
  double mass = 0.0, edge = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double f = std::exp(logf[i] - logmax) * trap_weight(i, grid_points);
    mass += f;
    m1 += f * bg.nodes[i];
    m2 += f * bg.nodes[i] * bg.nodes[i];
    if (i == 0 || i == grid_points - 1) edge += f;
  }
  if (mass <= 0.0) throw QuadratureError("quadrature: integrand vanished on the grid");
  if (edge / mass > kBoundaryMassTol)
    throw QuadratureError("quadrature: boundary mass exceeds tolerance");
  QuadratureMoments out;
  out.mean_beta = m1 / mass;
  out.var_beta = m2 / mass - out.mean_beta * out.mean_beta;
  out.mean_tau2 = std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

QuadratureMoments quadrature_posterior_moments(const SsgFamily& family,
                                               const Dataset& data,
                                               const GaussianParams& prior,
                                               double alpha,
                                               const Eigen::VectorXd& xi,
                                               int grid_points) {
  check_tiny(data);
  if (!family.is_type2())
    throw DomainError("quadrature: Gaussian prior requires a count family here");
  if (!data.m) throw DomainError("quadrature: count family needs sizes m");
  if (xi.size() != data.n()) throw DomainError("quadrature: xi length mismatch");
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("quadrature: alpha out of range");

  return beta_line_integral(prior, grid_points, [&](double beta) {
    if (alpha == 0.0) return 0.0;
    Theta theta{Eigen::VectorXd::Constant(1, beta), std::nullopt};
    double work = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      work += log_minorizer(family, data.X.row(i).transpose(), data.y[i], theta,
                            xi[i], (*data.m)[i]);
    return alpha * work;
  });
}

QuadratureMoments quadrature_posterior_moments(const Dataset& data,
                                               const GaussianParams& prior,
                                               const BQRConfig& cfg,
                                               const Eigen::VectorXd& xi,
                                               int grid_points) {
  check_tiny(data);
  if (xi.size() != data.n()) throw DomainError("quadrature: xi length mismatch");
  const SsgFamily family = SsgFamily::ald(cfg.u);
  return beta_line_integral(prior, grid_points, [&](double beta) {
    Theta theta{Eigen::VectorXd::Constant(1, beta), cfg.tau0 * cfg.tau0};
    double work = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      work += log_minorizer(family, data.X.row(i).transpose(), data.y[i], theta,
                            std::max(xi[i], kXiFloor));
    return cfg.alpha * work;
  });
}

Eigen::VectorXd fd_gradient(const VariationalState& state, const Dataset& data,
                            double step) {
  if (!(step > 0.0)) throw DomainError("fd_gradient: step must be positive");
  Eigen::VectorXd grad(state.xi.size());
  VariationalState probe = state;
  for (Eigen::Index i = 0; i < state.xi.size(); ++i) {
    const double lo = state.xi[i] - step;
    if (state.family.singular_at_zero() && lo < kXiFloor)
      throw DomainError("fd_gradient: xi - step crosses the singularity floor");
    if (lo < 0.0) throw DomainError("fd_gradient: xi - step is negative");

    probe.xi = state.xi;
    probe.xi[i] = state.xi[i] + step;
    refresh_posterior(probe, data);
    const double up = elbo(probe, data);

    probe.xi[i] = lo;
    refresh_posterior(probe, data);
    const double down = elbo(probe, data);

    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double renyi_laplace(const Eigen::VectorXd& beta, double tau,
                     const Eigen::VectorXd& beta_ref, double tau_ref,
                     const Eigen::MatrixXd& X, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("renyi_laplace: alpha must lie in (0,1)");
  if (!(tau > 0.0 && tau_ref > 0.0))
    throw DomainError("renyi_laplace: rates must be positive");
  const double mix = alpha * tau + (1.0 - alpha) * tau_ref;
  const double diff = alpha * tau - (1.0 - alpha) * tau_ref;
  const double log_scale = alpha * std::log(0.5 * tau) +
                           (1.0 - alpha) * std::log(0.5 * tau_ref);
  const Eigen::VectorXd gap = (X * (beta - beta_ref)).cwiseAbs();

  double acc = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double d = gap[i];
    const double e_ref = std::exp(-tau_ref * (1.0 - alpha) * d);
    const double e_cur = std::exp(-tau * alpha * d);
    const double psi1 = (e_ref + e_cur) / mix;
    // Removable singularity at alpha*tau == (1-alpha)*tau_ref.
    const double psi2 = std::abs(diff) < 1e-10 * tau_ref
                            ? d * e_ref
                            : (e_ref - e_cur) / diff;
    acc += std::log(psi1 + psi2) + log_scale;
  }
  return acc / ((alpha - 1.0) * static_cast<double>(X.rows()));
}

double renyi_negbin(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_ref,
                    const Eigen::MatrixXd& X, const Eigen::VectorXd& m,
                    double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("renyi_negbin: alpha must lie in (0,1)");
  if (m.size() != X.rows()) throw DomainError("renyi_negbin: m length mismatch");
  const Eigen::VectorXd eta = X * beta;
  const Eigen::VectorXd eta_ref = X * beta_ref;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double log_num =
        alpha * log_sigmoid(eta[i]) + (1.0 - alpha) * log_sigmoid(eta_ref[i]);
    const double w =
        alpha * log_sigmoid(-eta[i]) + (1.0 - alpha) * log_sigmoid(-eta_ref[i]);
    const double log_den = std::log(-std::expm1(w));
    acc += m[i] * (log_num - log_den);
  }
  return acc / ((alpha - 1.0) * static_cast<double>(X.rows()));
}

double ssg_absolute_moment(const SsgFamily& family, int k) {
  if (k < 0) throw DomainError("ssg_absolute_moment: order must be nonnegative");
  // exp{h(s^2)} decays at least exponentially for the built-in families over
  // the integration range used here.
  constexpr double kUpper = 150.0;
  constexpr int kPoints = 300001;  // odd, Simpson
  const double step = kUpper / (kPoints - 1);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double s = i * step;
    const double w = (i == 0 || i == kPoints - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double f = std::exp(family.h(s * s));
    den += w * f;
    num += w * f * std::pow(s, k);
  }
  return num / den;  // even integrand halves cancel
}

double ssg_curvature_bound(const SsgFamily& family) {
  double sup = 0.0;
  constexpr int kPoints = 2001;
  for (int i = 0; i < kPoints; ++i) {
    const double t =
        std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / (kPoints - 1));
    sup = std::max(sup, family.h2(t));
  }
  return sup;
}

namespace {

double max_row_norm(const Eigen::MatrixXd& X) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) best = std::max(best, X.row(i).norm());
  return best;
}

double max_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

RiskGapReport risk_gap(RiskModel model, int n, int p, double alpha,
                       std::uint64_t seed, int n_mc) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("risk_gap: alpha must lie in (0,1)");
  if (n_mc < 1) throw DomainError("risk_gap: n_mc must be >= 1");

  RiskGapReport out;
  out.alpha = alpha;
  out.n = n;
  out.p = p;
  out.n_mc = n_mc;

  const double eps = std::sqrt(p * std::log(static_cast<double>(n)) / n);
  const double D = 2.0;
  const std::uint64_t draw_seed = seed ^ 0x9e3779b97f4a7c15ULL;

  std::vector<double> divergences;
  divergences.reserve(n_mc);
  double constant = 0.0;

  if (model == RiskModel::Laplace) {
    out.model = "laplace";
    const double tau0_sq = 8.0;
    const double tau0 = std::sqrt(tau0_sq);
    SimOptions sim;
    sim.tau2 = tau0_sq;
    sim.beta_cov_scale = 1.0;
    auto [data, truth] = simulate(SsgFamily::laplace(), n, p, seed, sim);

    NormalGammaParams prior(Eigen::VectorXd::Zero(p),
                            Eigen::MatrixXd::Identity(p, p), 0.025, 0.025);
    FitOptions opts;
    opts.record_trace = false;
    const FitReport fitted = fit(SsgFamily::laplace(), data, prior, alpha, opts);
    const auto& post = std::get<NormalGammaParams>(fitted.state.posterior);

    const Eigen::MatrixXd draws = sample_joint(post, n_mc, draw_seed);
    for (int s = 0; s < n_mc; ++s) {
      const Eigen::VectorXd b = draws.row(s).head(p).transpose();
      const double tau = std::sqrt(draws(s, p));
      divergences.push_back(renyi_laplace(b, tau, truth.beta0, tau0, data.X, alpha));
    }

    // Bound constant for the location-scale case.
    const SsgFamily fam = SsgFamily::laplace();
    const double K = 1.0;
    const double M = ssg_curvature_bound(fam);
    const double E1 = ssg_absolute_moment(fam, 1);
    const double E2 = ssg_absolute_moment(fam, 2);
    const double E4 = ssg_absolute_moment(fam, 4);
    const double q_tilde =
        8.0 * std::max({1.0, K, K * E1, std::sqrt(M * E4), std::pow(M, 1.0 / 6.0),
                        std::pow(M, 0.25), std::sqrt(M * E2)});
    const double Q = max_row_norm(data.X) *
                     std::max(tau0_sq, std::pow(tau0, -4.0)) * q_tilde;
    const double lambda_max = max_eigenvalue(prior.Sigma);
    const double prior_const = prior.b / (2.0 * std::tgamma(0.5 * prior.a)) *
                               std::pow(0.5 * prior.b * tau0_sq, 0.5 * prior.a - 1.0) *
                               std::exp(-0.5 * prior.b * tau0_sq);
    const Eigen::VectorXd centered = truth.beta0 - prior.mu;
    const double delta_sq =
        centered.dot(prior.Sigma.llt().solve(centered));
    constant = 6.0 +
               std::log(std::sqrt(4.0 * lambda_max) / tau0 * prior_const) +
               (tau0_sq + 1.0 / Q) * (delta_sq + 1.0 / (Q * Q));
  } else {
    out.model = "negbin";
    SimOptions sim;
    sim.m = 10.0;
    auto [data, truth] = simulate(SsgFamily::negative_binomial(), n, p, seed, sim);

    GaussianParams prior(Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Identity(p, p));
    FitOptions opts;
    opts.record_trace = false;
    const FitReport fitted =
        fit(SsgFamily::negative_binomial(), data, prior, alpha, opts);
    const auto& post = std::get<GaussianParams>(fitted.state.posterior);

    const Eigen::MatrixXd draws = sample(post, n_mc, draw_seed);
    for (int s = 0; s < n_mc; ++s) {
      const Eigen::VectorXd b = draws.row(s).transpose();
      divergences.push_back(renyi_negbin(b, truth.beta0, data.X, *data.m, alpha));
    }

    const double row_norm = max_row_norm(data.X);
    const double b0_norm = truth.beta0.norm();
    const double m_star = data.m->maxCoeff();
    const double Q = std::max(4.0 * row_norm, 8.0 * row_norm * row_norm * b0_norm) *
                     m_star * (1.0 + std::exp(row_norm * b0_norm));
    const double lambda_max = max_eigenvalue(prior.Sigma);
    const Eigen::VectorXd centered = truth.beta0 - prior.mu;
    const double delta_sq =
        centered.dot(prior.Sigma.llt().solve(centered));
    constant = 0.5 * (8.0 + std::log(2.0) + std::log(lambda_max) +
                      2.0 * std::log(Q) + delta_sq + 1.0 / (lambda_max * Q * Q));
  }

  double mean = 0.0;
  for (double d : divergences) mean += d;
  mean /= divergences.size();
  double var = 0.0;
  for (double d : divergences) var += (d - mean) * (d - mean);
  var = divergences.size() > 1 ? var / (divergences.size() - 1.0) : 0.0;

  out.lhs = (1.0 - alpha) * mean;
  out.mc_se = (1.0 - alpha) * std::sqrt(var / divergences.size());
  out.rhs = D * alpha * eps * eps +
            p * std::log(static_cast<double>(p)) / n +
            constant * (static_cast<double>(p) / n) * std::log(1.0 / eps);
  out.gap = out.rhs - out.lhs;
  return out;
}

}  // namespace tavie
