#ifndef TAVIE_SSG_FAMILY_HPP
#define TAVIE_SSG_FAMILY_HPP

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "tavie/errors.hpp"

namespace tavie {

/// Likelihood families p(y|x,theta) = r * exp{ s*zeta + t*h(zeta^2) } with h
/// convex and decreasing on the positive reals.  The heavy-tailed linear
/// regression families (Laplace, Student-t) place zeta on the scaled residual
/// tau*(y - x'beta); the Bernoulli-type count families place zeta on the
/// linear predictor x'beta; the asymmetric-Laplace family used for quantile
/// regression places zeta on the raw residual and carries a linear skew term.
enum class FamilyKind { Laplace, StudentT, TypeII, ALD, Custom };

/// Count model selecting the (a_i, b_i) coefficients of a TypeII family.
enum class CountModel { Binomial, NegativeBinomial };

class SsgFamily {
public:
  static SsgFamily laplace();
  static SsgFamily student_t(int nu);
  static SsgFamily binomial();
  static SsgFamily negative_binomial();
  static SsgFamily ald(double u);
  /// Extension hook: a user supplied (h, h', h'') triple.  The triple must be
  /// convex decreasing; apply_floor marks families singular at zero.
  static SsgFamily custom(std::function<double(double)> h,
                          std::function<double(double)> h1,
                          std::function<double(double)> h2,
                          bool apply_floor = false);

  FamilyKind kind() const { return kind_; }
  int nu() const { return nu_; }
  double quantile_level() const { return u_; }
  CountModel count_model() const { return count_model_; }
  std::string name() const;

  bool is_type1() const {
    return kind_ == FamilyKind::Laplace || kind_ == FamilyKind::StudentT;
  }
  bool is_type2() const { return kind_ == FamilyKind::TypeII; }
  bool is_ald() const { return kind_ == FamilyKind::ALD; }
  /// True when A(xi) = h'(xi^2) is singular at xi = 0.
  bool singular_at_zero() const;

  double h(double t) const;
  double h1(double t) const;
  double h2(double t) const;

private:
  SsgFamily() = default;

  FamilyKind kind_ = FamilyKind::Laplace;
  int nu_ = 0;
  double u_ = 0.5;
  CountModel count_model_ = CountModel::Binomial;
  bool custom_floor_ = false;
  std::function<double(double)> ch_, ch1_, ch2_;
};

/// Regression parameters: coefficients plus the squared scale for the
/// location-scale families (absent for count models).
struct Theta {
  Eigen::VectorXd beta;
  std::optional<double> tau2;
};

/// Per-observation (a_i, b_i) coefficients of a TypeII likelihood.
struct TypeIICoefficients {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

/// Floor applied to xi for families whose A coefficient blows up at zero.
inline constexpr double kXiFloor = 1e-8;

/// A(xi) = h'(xi^2); strictly negative.  Throws DomainError when xi lies
/// below kXiFloor for a family that is singular at zero.
double a_coef(const SsgFamily& family, double xi);

/// gamma(xi) = h(xi^2) - xi^2 h'(xi^2), the constant part of the tangent bound.
double gamma_coef(const SsgFamily& family, double xi);

/// A'(xi) = 2 xi h''(xi^2), used by the objective gradient.
double a_coef_prime(const SsgFamily& family, double xi);

/// Exact per-observation log density/mass, normalizing constants included.
double log_likelihood(const SsgFamily& family, const Eigen::VectorXd& x,
                      double y, const Theta& theta,
                      std::optional<double> m = std::nullopt);

/// Log of the tangent lower bound at xi, with the same normalizing constants
/// as log_likelihood; equals log_likelihood iff |zeta| == xi.
double log_minorizer(const SsgFamily& family, const Eigen::VectorXd& x,
                     double y, const Theta& theta, double xi,
                     std::optional<double> m = std::nullopt);

/// Builds the (a, b) coefficient vectors for a count model:
/// Binomial -> (y, m); NegativeBinomial -> (m, m + y).
TypeIICoefficients typeII_coefficients(CountModel model,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& m);

}  // namespace tavie

#endif  // TAVIE_SSG_FAMILY_HPP
