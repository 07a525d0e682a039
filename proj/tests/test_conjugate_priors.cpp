#include <cmath>

#include <doctest.h>

#include "tavie/conjugate_priors.hpp"

using namespace tavie;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }
Eigen::MatrixXd mat1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

}  // namespace

TEST_CASE("posterior point summaries") {
  const NormalGammaParams a(vec1(1.0), mat1(0.5), 2.0, 3.0);
  auto [beta, tau2] = ng_point_estimate(a);
  CHECK(beta[0] == 1.0);
  CHECK(tau2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const NormalGammaParams b(vec1(0.0), mat1(1.0), 1.0, 1.0);
  CHECK(ng_point_estimate(b).second == doctest::Approx(1.0));

  Eigen::VectorXd mu(2);
  mu << 2.0, -1.0;
  const NormalGammaParams c(mu, Eigen::MatrixXd::Identity(2, 2), 4.0, 2.0);
  CHECK(ng_point_estimate(c).second == doctest::Approx(2.0));
  CHECK(ng_point_estimate(c).first.isApprox(mu));
}

TEST_CASE("constructors reject broken hyperparameters") {
  CHECK_THROWS_AS(NormalGammaParams(vec1(0.0), mat1(-1.0), 1.0, 1.0), InvariantError);
  CHECK_THROWS_AS(NormalGammaParams(vec1(0.0), mat1(1.0), 0.0, 1.0), InvariantError);
  CHECK_THROWS_AS(NormalGammaParams(vec1(0.0), mat1(1.0), 1.0, -2.0), InvariantError);
  CHECK_THROWS_AS(GaussianParams(vec1(3.0), mat1(0.0)), InvariantError);

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(GaussianParams(Eigen::VectorXd::Zero(2), asym), InvariantError);
}

TEST_CASE("sampling is deterministic and centred") {
  const NormalGammaParams ng(vec1(0.0), mat1(1.0), 4.0, 4.0);
  const Eigen::MatrixXd d1 = sample(ng, 64, 7);
  const Eigen::MatrixXd d2 = sample(ng, 64, 7);
  CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sample(ng, 64, 8) - d1).cwiseAbs().maxCoeff() != 0.0);

  // Gamma(2, 2) has mean 1.
  const Eigen::MatrixXd joint = sample_joint(ng, 200000, 11);
  CHECK(std::abs(joint.col(1).mean() - 1.0) < 0.02);

  const GaussianParams tight(vec1(5.0), mat1(1e-12));
  const Eigen::MatrixXd d3 = sample(tight, 500, 3);
  CHECK((d3.array() - 5.0).abs().maxCoeff() < 1e-5);
}

TEST_CASE("gaussian sampling moments match the parameters") {
  Eigen::MatrixXd Sigma(2, 2);
  Sigma << 2.0, 0.5, 0.5, 1.0;
  Eigen::VectorXd mu(2);
  mu << -1.0, 3.0;
  const GaussianParams g(mu, Sigma);
  const int k = 100000;
  const Eigen::MatrixXd draws = sample(g, k, 19);

  const Eigen::VectorXd mean = draws.colwise().mean();
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(Sigma(j, j) / k);
    CHECK(std::abs(mean[j] - mu[j]) < 3.0 * se);
  }
  const Eigen::MatrixXd centered = draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (k - 1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double se =
          std::sqrt((Sigma(a, a) * Sigma(b, b) + Sigma(a, b) * Sigma(a, b)) / k);
      CHECK(std::abs(cov(a, b) - Sigma(a, b)) < 3.0 * se);
    }
}

TEST_CASE("credible intervals") {
  const GaussianParams g(vec1(0.0), mat1(1.0));
  auto [lo, hi] = credible_interval(g, 0.95, 0);
  CHECK(lo == doctest::Approx(-1.959964).epsilon(1e-5));
  CHECK(hi == doctest::Approx(1.959964).epsilon(1e-5));

  // Shifted and scaled.
  const GaussianParams g2(vec1(3.0), mat1(4.0));
  auto [lo2, hi2] = credible_interval(g2, 0.95, 0);
  CHECK(lo2 == doctest::Approx(3.0 - 2.0 * 1.959964).epsilon(1e-5));
  CHECK(hi2 == doctest::Approx(3.0 + 2.0 * 1.959964).epsilon(1e-5));

  // Simulated Normal-Gamma marginal is symmetric about mu at level 1/2.
  const NormalGammaParams ng(vec1(0.0), mat1(1.0), 6.0, 6.0);
  auto [qlo, qhi] = credible_interval(ng, 0.5, 0);
  const double sd = std::sqrt(6.0 / 4.0);
  CHECK(std::abs(qlo + qhi) < 0.05 * sd);

  CHECK_THROWS_AS(credible_interval(g, 1.5, 0), DomainError);
  CHECK_THROWS_AS(credible_interval(g, 0.5, 4), DomainError);
}

TEST_CASE("normal quantile accuracy") {
  // Round trip through the exact CDF.
  for (double p : {1e-8, 1e-4, 0.025, 0.31, 0.5, 0.8, 0.975, 1.0 - 1e-6}) {
    const double z = normal_quantile(p);
    const double back = 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(std::abs(back - p) <= 1e-12 * std::max(p, 1.0 - p) + 1e-300);
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
}
