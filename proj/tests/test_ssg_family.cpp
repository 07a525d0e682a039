#include <cmath>
#include <random>

#include <doctest.h>

#include "tavie/ssg_family.hpp"

using namespace tavie;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

// Random (x, y, theta, xi) tuples in the support of each family.
struct TupleGen {
  std::mt19937_64 rng{42};
  std::normal_distribution<double> gauss{0.0, 1.0};
  std::uniform_real_distribution<double> unif{0.0, 1.0};

  double positive(double lo, double hi) { return lo + (hi - lo) * unif(rng); }
};

}  // namespace

TEST_CASE("tangent curvature coefficient") {
  const auto laplace = SsgFamily::laplace();
  CHECK(a_coef(laplace, 1.0) == doctest::Approx(-0.5).epsilon(1e-12));

  const auto student = SsgFamily::student_t(5);
  CHECK(a_coef(student, 0.0) == doctest::Approx(-0.6).epsilon(1e-12));

  const auto type2 = SsgFamily::binomial();
  CHECK(a_coef(type2, 0.0) == doctest::Approx(-0.125).epsilon(1e-12));
  CHECK(a_coef(type2, 1.0) == doctest::Approx(-std::tanh(0.5) / 4.0).epsilon(1e-12));
  CHECK(a_coef(type2, 1.0) == doctest::Approx(-0.115520).epsilon(1e-5));

  // Series/direct branches agree around the switch point.
  CHECK(a_coef(type2, 9.9e-5) == doctest::Approx(a_coef(type2, 1.01e-4)).epsilon(1e-9));

  CHECK_THROWS_AS(a_coef(laplace, 1e-9), DomainError);
  CHECK_THROWS_AS(a_coef(SsgFamily::ald(0.3), 0.0), DomainError);
  CHECK_THROWS_AS(a_coef(laplace, -1.0), DomainError);
}

TEST_CASE("tangent offset coefficient") {
  CHECK(gamma_coef(SsgFamily::laplace(), 2.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(gamma_coef(SsgFamily::student_t(5), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gamma_coef(SsgFamily::binomial(), 0.0) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("exact log likelihoods") {
  Theta theta{vec1(0.0), 1.0};
  CHECK(log_likelihood(SsgFamily::laplace(), vec1(1.0), 0.0, theta) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));

  Theta beta_only{vec1(0.0), std::nullopt};
  CHECK(log_likelihood(SsgFamily::binomial(), vec1(1.0), 1.0, beta_only, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));

  // Student-t normalizer evaluated from its gamma-function form.
  const double expected =
      std::lgamma(3.0) - std::lgamma(2.5) - 0.5 * std::log(5.0 * M_PI);
  CHECK(log_likelihood(SsgFamily::student_t(5), vec1(1.0), 0.0, theta) ==
        doctest::Approx(expected).epsilon(1e-12));

  Theta bad{vec1(0.0), -1.0};
  CHECK_THROWS_AS(log_likelihood(SsgFamily::laplace(), vec1(1.0), 0.0, bad),
                  DomainError);
  CHECK_THROWS_AS(
      log_likelihood(SsgFamily::binomial(), vec1(1.0), 3.0, beta_only, 2.0),
      DomainError);
  CHECK_THROWS_AS(
      log_likelihood(SsgFamily::negative_binomial(), vec1(1.0), -1.0, beta_only, 2.0),
      DomainError);
}

TEST_CASE("tangent bound touches the likelihood") {
  Theta theta{vec1(0.0), 1.0};
  const auto laplace = SsgFamily::laplace();

  // Residual 0.7, tangency point 0.7: equality.
  const double ll = log_likelihood(laplace, vec1(1.0), 0.7, theta);
  const double touched = log_minorizer(laplace, vec1(1.0), 0.7, theta, 0.7);
  CHECK(std::abs(touched - ll) <= 1e-10);

  // Away from the tangency point the bound is strict.
  const double below = log_minorizer(laplace, vec1(1.0), 0.7, theta, 1.0);
  CHECK(below == doctest::Approx(std::log(0.5) - 0.5 * 0.49 - 0.5).epsilon(1e-12));
  CHECK(below == doctest::Approx(-1.438147).epsilon(1e-6));
  CHECK(ll == doctest::Approx(-1.393147).epsilon(1e-6));
  CHECK(below < ll);

  // Count model tangency at zero linear predictor.
  Theta beta_only{vec1(0.0), std::nullopt};
  const auto type2 = SsgFamily::binomial();
  const double ll2 = log_likelihood(type2, vec1(1.0), 1.0, beta_only, 1.0);
  const double b2 = log_minorizer(type2, vec1(1.0), 1.0, beta_only, 0.0, 1.0);
  CHECK(std::abs(b2 - ll2) <= 1e-12);
  CHECK(b2 == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("count model coefficients") {
  Eigen::VectorXd y(2), m(2);
  y << 1, 0;
  m << 1, 1;
  const auto bin = typeII_coefficients(CountModel::Binomial, y, m);
  CHECK(bin.a.isApprox(y));
  CHECK(bin.b.isApprox(m));

  Eigen::VectorXd y2 = vec1(3.0), m2 = vec1(10.0);
  const auto nb = typeII_coefficients(CountModel::NegativeBinomial, y2, m2);
  CHECK(nb.a[0] == 10.0);
  CHECK(nb.b[0] == 13.0);

  Eigen::VectorXd bad_y = vec1(2.0), bad_m = vec1(1.0);
  CHECK_THROWS_AS(typeII_coefficients(CountModel::Binomial, bad_y, bad_m), DomainError);
}

TEST_CASE("minorization and tangency over random tuples") {
  TupleGen gen;
  const std::vector<SsgFamily> families = {
      SsgFamily::laplace(), SsgFamily::student_t(5), SsgFamily::binomial(),
      SsgFamily::negative_binomial(), SsgFamily::ald(0.3)};

  for (const auto& family : families) {
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd x(3);
      for (int j = 0; j < 3; ++j) x[j] = gen.gauss(gen.rng);
      Eigen::VectorXd beta(3);
      for (int j = 0; j < 3; ++j) beta[j] = gen.gauss(gen.rng);
      Theta theta{beta, std::nullopt};
      std::optional<double> m;
      double y;
      if (family.is_type2()) {
        const double size = std::floor(gen.positive(1.0, 8.0));
        m = size;
        if (family.count_model() == CountModel::Binomial)
          y = std::floor(gen.positive(0.0, size + 0.999));
        else
          y = std::floor(gen.positive(0.0, 20.0));
      } else {
        theta.tau2 = gen.positive(0.3, 4.0);
        y = 2.0 * gen.gauss(gen.rng);
      }
      const double lo = family.singular_at_zero() ? kXiFloor : 0.0;
      const double xi = gen.positive(lo + 1e-6, 5.0);

      const double ll = log_likelihood(family, x, y, theta, m);
      const double bound = log_minorizer(family, x, y, theta, xi, m);
      CHECK(bound <= ll + 1e-12);

      // Tangency at |zeta| = xi.
      double zeta;
      if (family.is_type2()) {
        zeta = x.dot(beta);
      } else if (family.is_ald()) {
        zeta = y - x.dot(beta);
      } else {
        zeta = std::sqrt(*theta.tau2) * (y - x.dot(beta));
      }
      const double at = std::max(std::abs(zeta), lo);
      if (!family.singular_at_zero() || at > kXiFloor) {
        const double touched = log_minorizer(family, x, y, theta, at, m);
        CHECK(std::abs(touched - ll) <= 1e-10);
      }
    }
  }
}

TEST_CASE("derivatives of h agree with finite differences") {
  const std::vector<SsgFamily> families = {
      SsgFamily::laplace(), SsgFamily::student_t(5), SsgFamily::student_t(1),
      SsgFamily::binomial()};
  for (const auto& family : families) {
    for (int i = 0; i <= 80; ++i) {
      const double t = std::pow(10.0, -4.0 + 8.0 * i / 80.0);
      const double dt = t * 1e-4;

      const double fd1 = (family.h(t + dt) - family.h(t - dt)) / (2.0 * dt);
      CHECK(std::abs(fd1 - family.h1(t)) <= 1e-6 * std::abs(family.h1(t)));

      const double fd2 = (family.h1(t + dt) - family.h1(t - dt)) / (2.0 * dt);
      CHECK(std::abs(fd2 - family.h2(t)) <= 1e-6 * std::abs(family.h2(t)));

      CHECK(family.h1(t) < 0.0);
      CHECK(family.h2(t) > 0.0);
    }
  }
}

TEST_CASE("custom h triple plugs in") {
  // Gaussian-like kernel h(t) = -t/2 is convex only weakly; use -t/2 - log(1+t)
  // which is strictly convex decreasing.
  auto fam = SsgFamily::custom(
      [](double t) { return -0.5 * t - std::log1p(t); },
      [](double t) { return -0.5 - 1.0 / (1.0 + t); },
      [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); });
  CHECK(a_coef(fam, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(gamma_coef(fam, 1.0) ==
        doctest::Approx(-0.5 - std::log(2.0) + 1.0).epsilon(1e-12));
  CHECK(a_coef_prime(fam, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
}
