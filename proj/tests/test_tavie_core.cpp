#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "tavie/data_bench.hpp"
#include "tavie/tavie_core.hpp"

using namespace tavie;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }
Eigen::MatrixXd mat1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// The scalar Laplace problem with X = [1], y = 2, prior NG(0, 1, 1, 1).
Dataset scalar_problem() { return Dataset(mat1(1.0), vec1(2.0)); }
NormalGammaParams scalar_prior() {
  return NormalGammaParams(vec1(0.0), mat1(1.0), 1.0, 1.0);
}

VariationalState scalar_state() {
  VariationalState s;
  s.family = SsgFamily::laplace();
  s.alpha = 1.0;
  s.prior = scalar_prior();
  s.xi = vec1(1.0);
  return s;
}

}  // namespace

TEST_CASE("scalar Laplace update by hand") {
  const Dataset data = scalar_problem();
  const auto post =
      update_type1(scalar_prior(), data, SsgFamily::laplace(), 1.0, vec1(1.0));
  CHECK(post.Sigma(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.mu[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(post.b == doctest::Approx(3.0).epsilon(1e-12));

  VariationalState state = scalar_state();
  state.posterior = post;
  const Eigen::VectorXd k = kappa(state, data);
  CHECK(k[0] == doctest::Approx(7.0 / 6.0).epsilon(1e-12));

  const double expected_elbo = -std::log(3.0) + 0.5 * std::log(0.5) - 0.5;
  CHECK(elbo(state, data) == doctest::Approx(expected_elbo).epsilon(1e-12));
  CHECK(elbo(state, data) == doctest::Approx(-1.945186).epsilon(1e-6));

  const Eigen::VectorXd g = elbo_gradient(state, data);
  CHECK(g[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
  CHECK(g[0] == doctest::Approx(0.083333).epsilon(1e-4));
}

TEST_CASE("vanishing curvature recovers the prior") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 2; ++j) X(i, j) = gauss(rng);
    y[i] = gauss(rng);
  }
  const Dataset data(X, y);
  Eigen::VectorXd mu(2);
  mu << 0.4, -0.2;
  const NormalGammaParams prior(mu, 2.0 * Eigen::MatrixXd::Identity(2, 2), 3.0, 5.0);

  // Student-t curvature decays as xi grows; A -> 0 pushes the posterior back
  // to the prior except for the fixed shape increment.
  const auto post = update_type1(prior, data, SsgFamily::student_t(5), 1.0,
                                 Eigen::VectorXd::Constant(5, 1e8));
  CHECK(post.mu.isApprox(prior.mu, 1e-6));
  CHECK(post.Sigma.isApprox(prior.Sigma, 1e-6));
  CHECK(post.a == doctest::Approx(prior.a + 5.0));
  CHECK(post.b == doctest::Approx(prior.b).epsilon(1e-6));
}

TEST_CASE("row exchangeability") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(6, 2);
  Eigen::VectorXd y(6), xi(6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 2; ++j) X(i, j) = gauss(rng);
    y[i] = gauss(rng);
    xi[i] = 0.5 + std::abs(gauss(rng));
  }
  const NormalGammaParams prior(Eigen::VectorXd::Zero(2),
                                Eigen::MatrixXd::Identity(2, 2), 2.0, 2.0);
  const auto base =
      update_type1(prior, Dataset(X, y), SsgFamily::laplace(), 0.7, xi);

  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd Xp(6, 2);
  Eigen::VectorXd yp(6), xip(6);
  for (int i = 0; i < 6; ++i) {
    Xp.row(i) = X.row(perm[i]);
    yp[i] = y[perm[i]];
    xip[i] = xi[perm[i]];
  }
  const auto permuted =
      update_type1(prior, Dataset(Xp, yp), SsgFamily::laplace(), 0.7, xip);
  CHECK(permuted.mu.isApprox(base.mu, 1e-12));
  CHECK(permuted.Sigma.isApprox(base.Sigma, 1e-12));
  CHECK(permuted.b == doctest::Approx(base.b).epsilon(1e-12));
}

TEST_CASE("count model update by hand") {
  const Dataset data(mat1(1.0), vec1(1.0), Eigen::VectorXd::Ones(1));
  const GaussianParams prior(vec1(0.0), mat1(1.0));
  const auto coeffs = typeII_coefficients(CountModel::Binomial, data.y, *data.m);
  const auto post = update_type2(prior, data, coeffs, 1.0, vec1(1.0));

  const double lambda = std::tanh(0.5) / 4.0;  // -A(1)
  const double expected_sigma = 1.0 / (1.0 + 2.0 * lambda);
  CHECK(post.Sigma(0, 0) == doctest::Approx(expected_sigma).epsilon(1e-12));
  CHECK(post.Sigma(0, 0) == doctest::Approx(0.812323).epsilon(1e-6));
  CHECK(post.mu[0] == doctest::Approx(0.5 * expected_sigma).epsilon(1e-12));
  CHECK(post.mu[0] == doctest::Approx(0.406161).epsilon(1e-6));

  // Flipping the observation flips the mean and keeps the spread.
  const Dataset flipped(mat1(1.0), vec1(0.0), Eigen::VectorXd::Ones(1));
  const auto coeffs0 = typeII_coefficients(CountModel::Binomial, flipped.y, *flipped.m);
  const auto post0 = update_type2(prior, flipped, coeffs0, 1.0, vec1(1.0));
  CHECK(post0.Sigma(0, 0) == doctest::Approx(post.Sigma(0, 0)).epsilon(1e-12));
  CHECK(post0.mu[0] == doctest::Approx(-post.mu[0]).epsilon(1e-12));

  // Both correction terms are linear in alpha.
  const auto half = update_type2(prior, data, coeffs, 0.5, vec1(1.0));
  const double prec_full = 1.0 / post.Sigma(0, 0) - 1.0;
  const double prec_half = 1.0 / half.Sigma(0, 0) - 1.0;
  CHECK(prec_half == doctest::Approx(0.5 * prec_full).epsilon(1e-12));
  const double rhs_full = post.mu[0] / post.Sigma(0, 0);
  const double rhs_half = half.mu[0] / half.Sigma(0, 0);
  CHECK(rhs_half == doctest::Approx(0.5 * rhs_full).epsilon(1e-12));
}

TEST_CASE("kappa pieces") {
  // Centered binomial data with zero prior mean keeps the posterior mean at
  // zero, so kappa reduces to the quadratic form.
  Eigen::MatrixXd X(2, 1);
  X << 1.0, -2.0;
  Eigen::VectorXd y(2), m(2);
  y << 1.0, 1.0;
  m << 2.0, 2.0;
  const Dataset data(X, y, m);
  VariationalState state;
  state.family = SsgFamily::binomial();
  state.alpha = 1.0;
  state.prior = GaussianParams(vec1(0.0), mat1(1.0));
  state.coeffs = typeII_coefficients(CountModel::Binomial, y, m);
  state.xi = Eigen::VectorXd::Ones(2);
  refresh_posterior(state, data);

  const auto& post = std::get<GaussianParams>(state.posterior);
  CHECK(std::abs(post.mu[0]) < 1e-14);
  const Eigen::VectorXd k = kappa(state, data);
  CHECK(k[0] == doctest::Approx(post.Sigma(0, 0)).epsilon(1e-12));
  CHECK(k[1] == doctest::Approx(4.0 * post.Sigma(0, 0)).epsilon(1e-12));

  // Scaling a row scales its quadratic form by the square.
  const Eigen::VectorXd q = detail::rowwise_quadform(3.0 * X, post.Sigma);
  CHECK(q[0] == doctest::Approx(9.0 * post.Sigma(0, 0)).epsilon(1e-12));
}

TEST_CASE("fit reaches the scalar fixed point") {
  const Dataset data = scalar_problem();
  FitOptions opts;
  opts.tol = 1e-9;
  const FitReport report = fit(SsgFamily::laplace(), data, scalar_prior(), 1.0, opts);
  CHECK(report.converged);
  CHECK(report.fixed_point_residual <= 1e-8);

  // Iterate the scalar map independently.
  Eigen::VectorXd xi = Eigen::VectorXd::Ones(1);
  VariationalState state = scalar_state();
  for (int t = 0; t < 400; ++t) {
    state.xi = xi;
    refresh_posterior(state, data);
    xi = kappa(state, data).cwiseSqrt();
  }
  CHECK(report.state.xi[0] == doctest::Approx(xi[0]).epsilon(1e-9));
  const auto& post = std::get<NormalGammaParams>(report.state.posterior);
  const auto& manual = std::get<NormalGammaParams>(state.posterior);
  CHECK(post.mu[0] == doctest::Approx(manual.mu[0]).epsilon(1e-9));
  CHECK(post.b == doctest::Approx(manual.b).epsilon(1e-9));

  // ELBO trace is nondecreasing.
  for (std::size_t t = 1; t < report.elbo_trace.size(); ++t)
    CHECK(report.elbo_trace[t] >= report.elbo_trace[t - 1] - 1e-10);
}

TEST_CASE("synthetic student fit converges monotonically") {
  auto [data, truth] = simulate(SsgFamily::student_t(5), 200, 8, 0);
  const NormalGammaParams prior(Eigen::VectorXd::Zero(8),
                                Eigen::MatrixXd::Identity(8, 8), 0.025, 0.025);
  FitOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 500;
  const FitReport report = fit(SsgFamily::student_t(5), data, prior, 1.0, opts);
  CHECK(report.converged);
  CHECK(report.iterations <= 500);
  for (std::size_t t = 1; t < report.elbo_trace.size(); ++t)
    CHECK(report.elbo_trace[t] >= report.elbo_trace[t - 1] - 1e-10);

  // At the fixed point the profile gradient vanishes.
  const Eigen::VectorXd g = elbo_gradient(report.state, data);
  const Eigen::VectorXd k = kappa(report.state, data);
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + k.cwiseAbs().maxCoeff()));
}

TEST_CASE("initialization does not change the fixed point") {
  std::mt19937_64 seeds(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = static_cast<std::uint64_t>(seeds());
    const bool student = trial % 2 == 0;
    const SsgFamily family =
        student ? SsgFamily::student_t(5) : SsgFamily::laplace();
    auto [data, truth] = simulate(family, 60, 3, seed);
    const NormalGammaParams prior(Eigen::VectorXd::Zero(3),
                                  Eigen::MatrixXd::Identity(3, 3), 2.0, 2.0);
    FitOptions a;
    a.init = XiInit::Ones;
    FitOptions b;
    b.init = XiInit::Residual;
    const FitReport ra = fit(family, data, prior, 1.0, a);
    const FitReport rb = fit(family, data, prior, 1.0, b);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    CHECK((ra.state.xi - rb.state.xi).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("zero residual data stays positive") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(20, 2);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 2; ++j) X(i, j) = gauss(rng);
  Eigen::VectorXd beta(2);
  beta << 1.0, -1.0;
  const Dataset data(X, X * beta);
  const NormalGammaParams prior(Eigen::VectorXd::Zero(2),
                                Eigen::MatrixXd::Identity(2, 2), 1.0, 1.0);
  const FitReport report = fit(SsgFamily::laplace(), data, prior, 1.0, {});
  CHECK(report.converged);
  CHECK(report.state.xi.minCoeff() > 0.0);
}

TEST_CASE("non-convergence is reported, not thrown") {
  auto [data, truth] = simulate(SsgFamily::laplace(), 100, 4, 9);
  const NormalGammaParams prior(Eigen::VectorXd::Zero(4),
                                Eigen::MatrixXd::Identity(4, 4), 1.0, 1.0);
  FitOptions opts;
  opts.max_iter = 2;
  const FitReport report = fit(SsgFamily::laplace(), data, prior, 1.0, opts);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 2);
}

TEST_CASE("update guards") {
  const Dataset data = scalar_problem();
  CHECK_THROWS_AS(
      update_type1(scalar_prior(), data, SsgFamily::laplace(), 1.5, vec1(1.0)),
      DomainError);
  CHECK_THROWS_AS(
      update_type1(scalar_prior(), data, SsgFamily::binomial(), 1.0, vec1(1.0)),
      DomainError);

  // Negative b coefficients flip the precision correction sign and break PD.
  const GaussianParams prior(vec1(0.0), mat1(1.0));
  TypeIICoefficients broken{vec1(1.0), vec1(-100.0)};
  CHECK_THROWS_AS(update_type2(prior, data, broken, 1.0, vec1(1.0)), NumericalError);

  // The gradient is undefined below the singularity floor.
  VariationalState state = scalar_state();
  state.xi = vec1(1e-9);
  refresh_posterior(state, data);
  CHECK_THROWS_AS(elbo_gradient(state, data), DomainError);
}

TEST_CASE("dataset invariants") {
  Eigen::MatrixXd X(2, 2);
  X << 1.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(Dataset(X, Eigen::VectorXd::Zero(2)), InvariantError);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Ones(2, 1), Eigen::VectorXd::Zero(3)),
                  InvariantError);
}
