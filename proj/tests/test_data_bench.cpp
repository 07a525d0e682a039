#include <cmath>
#include <sstream>

#include <doctest.h>

#include "tavie/data_bench.hpp"

using namespace tavie;

TEST_CASE("simulation is reproducible") {
  auto [d1, t1] = simulate(SsgFamily::student_t(5), 50, 4, 77);
  auto [d2, t2] = simulate(SsgFamily::student_t(5), 50, 4, 77);
  CHECK((d1.X - d2.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.y - d2.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t1.beta0 - t2.beta0).cwiseAbs().maxCoeff() == 0.0);

  auto [d3, t3] = simulate(SsgFamily::student_t(5), 50, 4, 78);
  CHECK((d1.y - d3.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("student residual variance") {
  // Var of the scaled-t error is nu / ((nu - 2) tau^2) = 5/9 here.
  auto [data, truth] = simulate(SsgFamily::student_t(5), 100000, 3, 5);
  const Eigen::VectorXd resid = data.y - data.X * truth.beta0;
  const double var = resid.squaredNorm() / resid.size();
  CHECK(std::abs(var - 5.0 / 9.0) < 0.05 * (5.0 / 9.0));
}

TEST_CASE("negative binomial mean at even odds") {
  // Shrinking the coefficient scale to zero pins the success probability at
  // one half, where the mean count is m.
  SimOptions opts;
  opts.beta_cov_scale = 1e-20;
  auto [data, truth] = simulate(SsgFamily::negative_binomial(), 100000, 2, 8, opts);
  CHECK(data.m);
  CHECK((*data.m)[0] == 10.0);
  CHECK(std::abs(data.y.mean() - 10.0) < 0.1);
}

TEST_CASE("laplace residuals have the requested scale") {
  auto [data, truth] = simulate(SsgFamily::laplace(), 100000, 2, 9);
  const Eigen::VectorXd resid = data.y - data.X * truth.beta0;
  // Var of Laplace(rate tau) is 2 / tau^2 = 2/3 at the default tau^2 = 3.
  const double var = resid.squaredNorm() / resid.size();
  CHECK(std::abs(var - 2.0 / 3.0) < 0.05 * (2.0 / 3.0));
}

TEST_CASE("experiment grid shape and scoring") {
  const auto rows = run_experiment(ExperimentGrid::E1, SsgFamily::laplace(), 2, 1.0, 3);
  CHECK(rows.size() == 8);
  for (const auto& r : rows) {
    CHECK(r.ok);
    CHECK(r.p == 8);
    CHECK(r.mse_beta >= 0.0);
    CHECK(r.mse_tau2.has_value());
    CHECK(r.runtime_s > 0.0);
    CHECK(r.method == "tavie");
  }
  const auto rows2 = run_experiment(ExperimentGrid::E2, SsgFamily::laplace(), 1, 1.0, 3);
  CHECK(rows2.size() == 4);
  CHECK(rows2[0].n == 1000);
}

TEST_CASE("tempering sweep reuses the plain-fit path at alpha one") {
  const std::uint64_t seed = 21;
  const auto sweep = alpha_sweep(SsgFamily::laplace(), {1.0}, 2, seed, 500, 4);
  REQUIRE(sweep.size() == 2);

  // Rebuild the same cell directly.
  for (int rep = 0; rep < 2; ++rep) {
    auto [data, truth] = simulate(SsgFamily::laplace(), 500, 4, seed + rep);
    NormalGammaParams prior(Eigen::VectorXd::Zero(4),
                            Eigen::MatrixXd::Identity(4, 4), 0.025, 0.025);
    FitOptions opts;
    opts.tol = 1e-9;
    opts.record_trace = false;
    const FitReport fitrep = fit(SsgFamily::laplace(), data, prior, 1.0, opts);
    const auto& post = std::get<NormalGammaParams>(fitrep.state.posterior);
    const double mse = (post.mu - truth.beta0).squaredNorm() / 4.0;
    CHECK(sweep[rep].mse_beta == mse);  // identical code path, identical bits
  }
}

TEST_CASE("bench csv layout") {
  std::vector<BenchRow> rows(1);
  rows[0].n = 10;
  rows[0].p = 2;
  rows[0].method = "tavie";
  rows[0].mse_beta = 0.5;
  rows[0].runtime_s = 0.25;
  rows[0].rep = 3;
  rows[0].ok = true;
  std::ostringstream os;
  write_bench_csv(os, rows);
  CHECK(os.str() == "n,p,method,mse_beta,mse_tau2,runtime_s,rep\n"
                    "10,2,tavie,0.5,nan,0.25,3\n");
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}
