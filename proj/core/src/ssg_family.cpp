#include "tavie/ssg_family.hpp"

#include <cmath>

namespace tavie {

namespace {

// log(2 cosh(z/2)) evaluated without overflow for large z >= 0.
double log_2cosh_half(double z) { return 0.5 * z + std::log1p(std::exp(-z)); }

double binom_log_coeff(double m, double y) {
  return std::lgamma(m + 1.0) - std::lgamma(y + 1.0) - std::lgamma(m - y + 1.0);
}

double negbin_log_coeff(double m, double y) {
  return std::lgamma(y + m) - std::lgamma(y + 1.0) - std::lgamma(m);
}

double student_log_norm(int nu, double tau) {
  return std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI) + std::log(tau);
}

}  // namespace

SsgFamily SsgFamily::laplace() {
  SsgFamily f;
  f.kind_ = FamilyKind::Laplace;
  return f;
}

SsgFamily SsgFamily::student_t(int nu) {
  if (nu < 1) throw DomainError("student_t: degrees of freedom must be >= 1");
  SsgFamily f;
  f.kind_ = FamilyKind::StudentT;
  f.nu_ = nu;
  return f;
}

SsgFamily SsgFamily::binomial() {
  SsgFamily f;
  f.kind_ = FamilyKind::TypeII;
  f.count_model_ = CountModel::Binomial;
  return f;
}

SsgFamily SsgFamily::negative_binomial() {
  SsgFamily f;
  f.kind_ = FamilyKind::TypeII;
  f.count_model_ = CountModel::NegativeBinomial;
  return f;
}

SsgFamily SsgFamily::ald(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("ald: quantile level must lie in (0,1)");
  SsgFamily f;
  f.kind_ = FamilyKind::ALD;
  f.u_ = u;
  return f;
}

SsgFamily SsgFamily::custom(std::function<double(double)> h,
                            std::function<double(double)> h1,
                            std::function<double(double)> h2,
                            bool apply_floor) {
  SsgFamily f;
  f.kind_ = FamilyKind::Custom;
  f.ch_ = std::move(h);
  f.ch1_ = std::move(h1);
  f.ch2_ = std::move(h2);
  f.custom_floor_ = apply_floor;
  return f;
}

std::string SsgFamily::name() const {
  switch (kind_) {
    case FamilyKind::Laplace: return "laplace";
    case FamilyKind::StudentT: return "student_t(" + std::to_string(nu_) + ")";
    case FamilyKind::TypeII:
      return count_model_ == CountModel::Binomial ? "binomial" : "negative_binomial";
    case FamilyKind::ALD: return "ald(" + std::to_string(u_) + ")";
    case FamilyKind::Custom: return "custom";
  }
  return "unknown";
}

bool SsgFamily::singular_at_zero() const {
  switch (kind_) {
    case FamilyKind::Laplace:
    case FamilyKind::ALD: return true;
    case FamilyKind::Custom: return custom_floor_;
    default: return false;
  }
}

double SsgFamily::h(double t) const {
  switch (kind_) {
    case FamilyKind::Laplace:
    case FamilyKind::ALD:
      return -std::sqrt(t);
    case FamilyKind::StudentT:
      return -0.5 * (nu_ + 1) * std::log1p(t / nu_);
    case FamilyKind::TypeII:
      return -log_2cosh_half(std::sqrt(t));
    case FamilyKind::Custom:
      return ch_(t);
  }
  return 0.0;
}

double SsgFamily::h1(double t) const {
  switch (kind_) {
    case FamilyKind::Laplace:
    case FamilyKind::ALD:
      return -0.5 / std::sqrt(t);
    case FamilyKind::StudentT:
      return -0.5 * (nu_ + 1) / (nu_ + t);
    case FamilyKind::TypeII: {
      // -tanh(sqrt(t)/2) / (4 sqrt(t)); series near the removable 0/0 at t=0.
      if (t < 1e-8) return -0.125 + t / 96.0 - t * t / 960.0;
      const double z = std::sqrt(t);
      return -std::tanh(0.5 * z) / (4.0 * z);
    }
    case FamilyKind::Custom:
      return ch1_(t);
  }
  return 0.0;
}

double SsgFamily::h2(double t) const {
  switch (kind_) {
    case FamilyKind::Laplace:
    case FamilyKind::ALD:
      return 0.25 * std::pow(t, -1.5);
    case FamilyKind::StudentT: {
      const double d = nu_ + t;
      return 0.5 * (nu_ + 1) / (d * d);
    }
    case FamilyKind::TypeII: {
      const double z = std::sqrt(t);
      // (2 tanh(z/2) - z sech^2(z/2)) / (16 z^3) cancels badly for small z.
      if (z < 1e-2) {
        const double z2 = z * z;
        return 1.0 / 96.0 - z2 / 480.0 + 17.0 * z2 * z2 / 53760.0;
      }
      const double c = std::cosh(0.5 * z);
      const double sech2 = 1.0 / (c * c);
      return (2.0 * std::tanh(0.5 * z) - z * sech2) / (16.0 * z * z * z);
    }
    case FamilyKind::Custom:
      return ch2_(t);
  }
  return 0.0;
}

namespace {

void check_floor(const SsgFamily& family, double xi) {
  if (xi < 0.0) throw DomainError("xi must be nonnegative");
  if (family.singular_at_zero() && xi < kXiFloor)
    throw DomainError("xi below floor " + std::to_string(kXiFloor) +
                      " for family " + family.name());
}

}  // namespace

double a_coef(const SsgFamily& family, double xi) {
  check_floor(family, xi);
  return family.h1(xi * xi);
}

double gamma_coef(const SsgFamily& family, double xi) {
  check_floor(family, xi);
  const double t = xi * xi;
  return family.h(t) - t * family.h1(t);
}

double a_coef_prime(const SsgFamily& family, double xi) {
  check_floor(family, xi);
  return 2.0 * xi * family.h2(xi * xi);
}

namespace {

struct Decomposition {
  double log_norm;  // log r_i with normalizing constants included
  double s;         // linear coefficient
  double t;         // weight on h(zeta^2)
  double zeta;
};

Decomposition decompose(const SsgFamily& family, const Eigen::VectorXd& x,
                        double y, const Theta& theta, std::optional<double> m) {
  if (x.size() != theta.beta.size())
    throw DomainError("log_likelihood: x and beta dimensions disagree");
  const double eta = x.dot(theta.beta);

  switch (family.kind()) {
    case FamilyKind::Laplace: {
      if (!theta.tau2 || *theta.tau2 <= 0.0)
        throw DomainError("laplace: tau2 must be positive");
      const double tau = std::sqrt(*theta.tau2);
      return {std::log(0.5 * tau), 0.0, 1.0, tau * (y - eta)};
    }
    case FamilyKind::StudentT: {
      if (!theta.tau2 || *theta.tau2 <= 0.0)
        throw DomainError("student_t: tau2 must be positive");
      const double tau = std::sqrt(*theta.tau2);
      return {student_log_norm(family.nu(), tau), 0.0, 1.0, tau * (y - eta)};
    }
    case FamilyKind::TypeII: {
      if (!m) throw DomainError("count model: size m is required");
      if (*m <= 0.0) throw DomainError("count model: m must be positive");
      if (family.count_model() == CountModel::Binomial) {
        if (y < 0.0 || y > *m)
          throw DomainError("binomial: y outside support [0, m]");
        return {binom_log_coeff(*m, y), y - 0.5 * *m, *m, eta};
      }
      if (y < 0.0) throw DomainError("negative_binomial: y must be nonnegative");
      return {negbin_log_coeff(*m, y), 0.5 * (*m - y), *m + y, eta};
    }
    case FamilyKind::ALD: {
      if (!theta.tau2 || *theta.tau2 <= 0.0)
        throw DomainError("ald: tau2 must be positive");
      const double tau = std::sqrt(*theta.tau2);
      const double u = family.quantile_level();
      const double skew = 2.0 * u - 1.0;
      return {std::log(2.0 * tau * u * (1.0 - u)), -tau * skew, tau, y - eta};
    }
    case FamilyKind::Custom:
      return {0.0, 0.0, 1.0, y - eta};
  }
  throw DomainError("unsupported family");
}

}  // namespace

double log_likelihood(const SsgFamily& family, const Eigen::VectorXd& x,
                      double y, const Theta& theta, std::optional<double> m) {
  const Decomposition d = decompose(family, x, y, theta, m);
  return d.log_norm + d.s * d.zeta + d.t * family.h(d.zeta * d.zeta);
}

double log_minorizer(const SsgFamily& family, const Eigen::VectorXd& x,
                     double y, const Theta& theta, double xi,
                     std::optional<double> m) {
  const Decomposition d = decompose(family, x, y, theta, m);
  const double bound = a_coef(family, xi) * d.zeta * d.zeta + gamma_coef(family, xi);
  return d.log_norm + d.s * d.zeta + d.t * bound;
}

TypeIICoefficients typeII_coefficients(CountModel model, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& m) {
  if (y.size() != m.size())
    throw DomainError("typeII_coefficients: y and m lengths disagree");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (m[i] <= 0.0)
      throw DomainError("typeII_coefficients: m must be positive at index " +
                        std::to_string(i));
    if (y[i] < 0.0)
      throw DomainError("typeII_coefficients: y must be nonnegative at index " +
                        std::to_string(i));
    if (model == CountModel::Binomial && y[i] > m[i])
      throw DomainError("typeII_coefficients: y > m at index " + std::to_string(i));
  }
  if (model == CountModel::Binomial) return {y, m};
  return {m, m + y};
}

}  // namespace tavie
