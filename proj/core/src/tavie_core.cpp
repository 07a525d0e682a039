#include "tavie/tavie_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "tavie/bqr.hpp"

#include <Eigen/Cholesky>

namespace tavie {

namespace detail {

int thread_budget() {
  static const int budget = [] {
    int v = 0;
    if (const char* env = std::getenv("TAVIE_THREADS")) v = std::atoi(env);
    if (v <= 0) {
      const unsigned hw = std::thread::hardware_concurrency();
      v = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return v;
  }();
  return budget;
}

namespace {

constexpr Eigen::Index kBlockRows = 4096;

// Splits [0, n) into contiguous chunks.  Every element is produced by the
// same per-row arithmetic, so the result is identical for any thread count.
template <typename Fn>
void parallel_chunks(Eigen::Index n, Fn&& fn) {
  const int budget = thread_budget();
  if (budget <= 1 || n < 2 * kBlockRows) {
    fn(Eigen::Index{0}, n);
    return;
  }
  const auto workers =
      std::min<Eigen::Index>(budget, (n + kBlockRows - 1) / kBlockRows);
  const Eigen::Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Eigen::Index w = 0; w < workers; ++w) {
    const Eigen::Index begin = w * chunk;
    const Eigen::Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

Eigen::MatrixXd pd_inverse(const Eigen::MatrixXd& S, const char* context) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(context) + ": Cholesky failed");
  return llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
}

}  // namespace

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index r = 0; r < n; r += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, n - r);
    const auto Xb = X.middleRows(r, len);
    G.noalias() += Xb.transpose() * w.segment(r, len).asDiagonal() * Xb;
  }
  return G;
}

Eigen::VectorXd rowwise_quadform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& S) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd q(n);
  parallel_chunks(n, [&](Eigen::Index begin, Eigen::Index end) {
    Eigen::VectorXd tmp(X.cols());
    for (Eigen::Index i = begin; i < end; ++i) {
      tmp.noalias() = S * X.row(i).transpose();
      q[i] = X.row(i) * tmp;
    }
  });
  return q;
}

double logdet_pd(const Eigen::MatrixXd& S, const char* context) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(context) + ": matrix not PD");
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

GaussianParams gaussian_quadratic_update(const GaussianParams& prior,
                                         const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& c,
                                         const Eigen::VectorXd& extra_rhs) {
  const Eigen::MatrixXd Sigma_inv = pd_inverse(prior.Sigma, "prior covariance");
  Eigen::MatrixXd M = Sigma_inv - weighted_gram(X, c);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("posterior precision: Cholesky failed");
  Eigen::MatrixXd Sigma_a = llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  Sigma_a = 0.5 * (Sigma_a + Sigma_a.transpose()).eval();
  const Eigen::VectorXd rhs = Sigma_inv * prior.mu + extra_rhs;
  return GaussianParams(Sigma_a * rhs, std::move(Sigma_a));
}

}  // namespace detail

NormalGammaParams update_type1(const NormalGammaParams& prior, const Dataset& data,
                               const SsgFamily& family, double alpha,
                               const Eigen::VectorXd& xi) {
  if (!family.is_type1())
    throw DomainError("update_type1: family is not a location-scale SSG family");
  if (xi.size() != data.n()) throw DomainError("update_type1: xi length mismatch");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("update_type1: alpha must lie in (0,1]");

  Eigen::VectorXd c(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double x = family.singular_at_zero() ? std::max(xi[i], kXiFloor) : xi[i];
    c[i] = 2.0 * alpha * a_coef(family, x);
  }

  Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.Sigma);
  if (prior_llt.info() != Eigen::Success)
    throw NumericalError("update_type1: prior covariance not PD");
  const Eigen::MatrixXd Sigma_inv =
      prior_llt.solve(Eigen::MatrixXd::Identity(prior.dim(), prior.dim()));

  Eigen::MatrixXd M = Sigma_inv - detail::weighted_gram(data.X, c);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("update_type1: posterior precision Cholesky failed");

  const Eigen::VectorXd rhs =
      Sigma_inv * prior.mu - data.X.transpose() * c.cwiseProduct(data.y);
  const Eigen::VectorXd mu_a = llt.solve(rhs);
  Eigen::MatrixXd Sigma_a = llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  Sigma_a = 0.5 * (Sigma_a + Sigma_a.transpose()).eval();

  const double a_a = prior.a + static_cast<double>(data.n()) * alpha;
  const double b_a = prior.b - c.cwiseProduct(data.y).dot(data.y) +
                     prior.mu.dot(Sigma_inv * prior.mu) - mu_a.dot(rhs);
  if (b_a <= 0.0)
    throw InvariantError("update_type1: b_alpha is not positive");
  return NormalGammaParams(mu_a, std::move(Sigma_a), a_a, b_a);
}

GaussianParams update_type2(const GaussianParams& prior, const Dataset& data,
                            const TypeIICoefficients& coeffs, double alpha,
                            const Eigen::VectorXd& xi) {
  if (xi.size() != data.n()) throw DomainError("update_type2: xi length mismatch");
  if (coeffs.a.size() != data.n() || coeffs.b.size() != data.n())
    throw DomainError("update_type2: coefficient length mismatch");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("update_type2: alpha must lie in (0,1]");

  const SsgFamily fam = SsgFamily::binomial();  // TypeII h is model independent
  Eigen::VectorXd c(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    c[i] = 2.0 * alpha * coeffs.b[i] * a_coef(fam, xi[i]);
  const Eigen::VectorXd extra =
      alpha * (data.X.transpose() * (coeffs.a - 0.5 * coeffs.b));
  return detail::gaussian_quadratic_update(prior, data.X, c, extra);
}

void refresh_posterior(VariationalState& state, const Dataset& data) {
  switch (state.family.kind()) {
    case FamilyKind::Laplace:
    case FamilyKind::StudentT:
      state.posterior = update_type1(std::get<NormalGammaParams>(state.prior), data,
                                     state.family, state.alpha, state.xi);
      return;
    case FamilyKind::TypeII:
      if (!state.coeffs)
        throw DomainError("refresh_posterior: TypeII state lacks coefficients");
      state.posterior = update_type2(std::get<GaussianParams>(state.prior), data,
                                     *state.coeffs, state.alpha, state.xi);
      return;
    case FamilyKind::ALD:
      state.posterior = update_bqr(
          std::get<GaussianParams>(state.prior), data,
          BQRConfig(state.family.quantile_level(), state.tau0, state.alpha),
          state.xi);
      return;
    case FamilyKind::Custom:
      throw DomainError("refresh_posterior: custom families have no conjugate update");
  }
}

Eigen::VectorXd kappa(const VariationalState& state, const Dataset& data) {
  switch (state.family.kind()) {
    case FamilyKind::Laplace:
    case FamilyKind::StudentT: {
      const auto& post = std::get<NormalGammaParams>(state.posterior);
      Eigen::VectorXd q = detail::rowwise_quadform(data.X, post.Sigma);
      const Eigen::VectorXd r = data.y - data.X * post.mu;
      return q + (post.a / post.b) * r.cwiseProduct(r);
    }
    case FamilyKind::TypeII: {
      const auto& post = std::get<GaussianParams>(state.posterior);
      Eigen::VectorXd q = detail::rowwise_quadform(data.X, post.Sigma);
      const Eigen::VectorXd f = data.X * post.mu;
      return q + f.cwiseProduct(f);
    }
    case FamilyKind::ALD: {
      const auto& post = std::get<GaussianParams>(state.posterior);
      Eigen::VectorXd q = detail::rowwise_quadform(data.X, post.Sigma);
      const Eigen::VectorXd r = data.y - data.X * post.mu;
      return q + r.cwiseProduct(r);
    }
    case FamilyKind::Custom:
      throw DomainError("kappa: custom families are not supported by the EM engine");
  }
  return {};
}

double elbo(const VariationalState& state, const Dataset& data) {
  switch (state.family.kind()) {
    case FamilyKind::Laplace:
    case FamilyKind::StudentT: {
      const auto& post = std::get<NormalGammaParams>(state.posterior);
      const double logdet = detail::logdet_pd(post.Sigma, "elbo");
      double gam = 0.0;
      for (Eigen::Index i = 0; i < state.xi.size(); ++i) {
        const double x = state.family.singular_at_zero()
                             ? std::max(state.xi[i], kXiFloor)
                             : state.xi[i];
        gam += gamma_coef(state.family, x);
      }
      return -0.5 * post.a * std::log(post.b) + 0.5 * logdet + state.alpha * gam;
    }
    case FamilyKind::TypeII: {
      if (!state.coeffs) throw DomainError("elbo: TypeII state lacks coefficients");
      const auto& post = std::get<GaussianParams>(state.posterior);
      const double logdet = detail::logdet_pd(post.Sigma, "elbo");
      Eigen::LLT<Eigen::MatrixXd> llt(post.Sigma);
      const double quad = post.mu.dot(llt.solve(post.mu));
      double gam = 0.0;
      for (Eigen::Index i = 0; i < state.xi.size(); ++i)
        gam += state.coeffs->b[i] * gamma_coef(state.family, state.xi[i]);
      return 0.5 * quad + 0.5 * logdet + state.alpha * gam;
    }
    case FamilyKind::ALD: {
      const auto& post = std::get<GaussianParams>(state.posterior);
      const double logdet = detail::logdet_pd(post.Sigma, "elbo");
      Eigen::LLT<Eigen::MatrixXd> llt(post.Sigma);
      const double quad = post.mu.dot(llt.solve(post.mu));
      const double tau_a = state.tau0 * state.alpha;
      double tail = 0.0;
      for (Eigen::Index i = 0; i < state.xi.size(); ++i) {
        const double x = std::max(state.xi[i], kXiFloor);
        tail += gamma_coef(state.family, x) +
                a_coef(state.family, x) * data.y[i] * data.y[i];
      }
      return 0.5 * quad + 0.5 * logdet + tau_a * tail;
    }
    case FamilyKind::Custom:
      throw DomainError("elbo: custom families are not supported by the EM engine");
  }
  return 0.0;
}

Eigen::VectorXd elbo_gradient(const VariationalState& state, const Dataset& data) {
  const Eigen::VectorXd k = kappa(state, data);
  Eigen::VectorXd g(state.xi.size());
  const double scale = state.family.is_ald() ? state.tau0 * state.alpha : state.alpha;
  for (Eigen::Index i = 0; i < state.xi.size(); ++i) {
    const double ap = a_coef_prime(state.family, state.xi[i]);
    double w = scale;
    if (state.family.is_type2()) {
      if (!state.coeffs)
        throw DomainError("elbo_gradient: TypeII state lacks coefficients");
      w *= state.coeffs->b[i];
    }
    g[i] = w * ap * (k[i] - state.xi[i] * state.xi[i]);
  }
  return g;
}

namespace detail {

Eigen::VectorXd initial_xi(const VariationalState& state, const Dataset& data,
                           XiInit init) {
  Eigen::VectorXd xi;
  if (init == XiInit::Ones) {
    xi = Eigen::VectorXd::Ones(data.n());
  } else {
    const Eigen::VectorXd& mu0 = std::visit([](const auto& p) -> const Eigen::VectorXd& {
      return p.mu;
    }, state.prior);
    if (state.family.is_type2())
      xi = (data.X * mu0).cwiseAbs().array() + 1.0;
    else
      xi = (data.y - data.X * mu0).cwiseAbs();
  }
  if (state.family.singular_at_zero()) xi = xi.cwiseMax(kXiFloor);
  return xi;
}

FitReport run_em(VariationalState state, const Dataset& data, const FitOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("fit: tol must be positive");
  if (opts.max_iter < 1) throw DomainError("fit: max_iter must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  FitReport report;
  double prev = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;

  auto record = [&](double value) {
    if (value + 1e-8 < prev)
      throw NumericalError("fit: objective decreased by more than 1e-8");
    if (opts.record_trace) report.elbo_trace.push_back(value);
    prev = value;
  };

  for (int t = 1; t <= opts.max_iter; ++t) {
    refresh_posterior(state, data);
    record(elbo(state, data));

    Eigen::VectorXd xi_next = kappa(state, data).cwiseSqrt();
    if (state.family.singular_at_zero()) xi_next = xi_next.cwiseMax(kXiFloor);
    const double delta = (xi_next - state.xi).norm();
    state.xi = std::move(xi_next);
    iterations = t;
    if (delta <= opts.tol) {
      converged = true;
      break;
    }
  }

  // Final refresh so the reported posterior matches the reported xi.
  refresh_posterior(state, data);
  record(elbo(state, data));
  const Eigen::VectorXd k = kappa(state, data);
  report.fixed_point_residual =
      (state.xi.cwiseProduct(state.xi) - k).cwiseAbs().maxCoeff();

  report.state = std::move(state);
  report.iterations = iterations;
  report.converged = converged;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace detail

FitReport fit(const SsgFamily& family, const Dataset& data,
              const NormalGammaParams& prior, double alpha, const FitOptions& opts) {
  if (!family.is_type1())
    throw DomainError("fit: Normal-Gamma prior requires a location-scale family");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fit: alpha must lie in (0,1]");
  VariationalState state;
  state.family = family;
  state.alpha = alpha;
  state.prior = prior;
  state.xi = detail::initial_xi(state, data, opts.init);
  return detail::run_em(std::move(state), data, opts);
}

FitReport fit(const SsgFamily& family, const Dataset& data,
              const GaussianParams& prior, double alpha, const FitOptions& opts) {
  if (!family.is_type2())
    throw DomainError("fit: Gaussian prior requires a count family (use fit_bqr for quantiles)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fit: alpha must lie in (0,1]");
  if (!data.m) throw DomainError("fit: count families need per-observation sizes m");
  VariationalState state;
  state.family = family;
  state.alpha = alpha;
  state.prior = prior;
  state.coeffs = typeII_coefficients(family.count_model(), data.y, *data.m);
  state.xi = detail::initial_xi(state, data, opts.init);
  return detail::run_em(std::move(state), data, opts);
}

}  // namespace tavie
