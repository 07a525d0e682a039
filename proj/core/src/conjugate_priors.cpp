#include "tavie/conjugate_priors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

namespace tavie {

namespace detail {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& S, const char* context) {
  if (S.rows() != S.cols())
    throw InvariantError(std::string(context) + ": Sigma must be square");
  if (!S.isApprox(S.transpose(), 1e-12))
    throw InvariantError(std::string(context) + ": Sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw InvariantError(std::string(context) + ": Sigma is not positive definite");
  return llt.matrixL();
}

}  // namespace detail

NormalGammaParams::NormalGammaParams(Eigen::VectorXd mu_, Eigen::MatrixXd Sigma_,
                                     double a_, double b_)
    : mu(std::move(mu_)), Sigma(std::move(Sigma_)), a(a_), b(b_) {
  if (mu.size() != Sigma.rows())
    throw InvariantError("NormalGammaParams: mu and Sigma dimensions disagree");
  detail::cholesky_lower(Sigma, "NormalGammaParams");
  if (a <= 0.0 || b <= 0.0)
    throw InvariantError("NormalGammaParams: a and b must be positive");
}

GaussianParams::GaussianParams(Eigen::VectorXd mu_, Eigen::MatrixXd Sigma_)
    : mu(std::move(mu_)), Sigma(std::move(Sigma_)) {
  if (mu.size() != Sigma.rows())
    throw InvariantError("GaussianParams: mu and Sigma dimensions disagree");
  detail::cholesky_lower(Sigma, "GaussianParams");
}

std::pair<Eigen::VectorXd, double> ng_point_estimate(const NormalGammaParams& params) {
  return {params.mu, params.a / params.b};
}

namespace {

Eigen::MatrixXd gaussian_draws(const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                               int k, std::mt19937_64& rng,
                               const Eigen::VectorXd* inv_scale) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const Eigen::Index p = mu.size();
  Eigen::MatrixXd out(k, p);
  Eigen::VectorXd z(p);
  for (int s = 0; s < k; ++s) {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = standard(rng);
    Eigen::VectorXd draw = mu + L * z * (inv_scale ? (*inv_scale)[s] : 1.0);
    out.row(s) = draw.transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd sample(const GaussianParams& params, int k, std::uint64_t seed) {
  if (k < 1) throw DomainError("sample: k must be >= 1");
  const Eigen::MatrixXd L = detail::cholesky_lower(params.Sigma, "sample");
  std::mt19937_64 rng(seed);
  return gaussian_draws(params.mu, L, k, rng, nullptr);
}

Eigen::MatrixXd sample_joint(const NormalGammaParams& params, int k, std::uint64_t seed) {
  if (k < 1) throw DomainError("sample: k must be >= 1");
  const Eigen::MatrixXd L = detail::cholesky_lower(params.Sigma, "sample");
  std::mt19937_64 rng(seed);
  // tau2 ~ Gamma(a/2, rate b/2); std::gamma_distribution is shape-scale.
  std::gamma_distribution<double> gamma(0.5 * params.a, 2.0 / params.b);
  Eigen::VectorXd tau2(k), inv_tau(k);
  for (int s = 0; s < k; ++s) {
    tau2[s] = gamma(rng);
    inv_tau[s] = 1.0 / std::sqrt(tau2[s]);
  }
  const Eigen::Index p = params.mu.size();
  Eigen::MatrixXd out(k, p + 1);
  out.leftCols(p) = gaussian_draws(params.mu, L, k, rng, &inv_tau);
  out.col(p) = tau2;
  return out;
}

Eigen::MatrixXd sample(const NormalGammaParams& params, int k, std::uint64_t seed) {
  return sample_joint(params, k, seed).leftCols(params.mu.size());
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw DomainError("normal_quantile: probability must lie in (0,1)");
  // Acklam's rational approximation.
  static const double A[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double C[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
  }
  // One Halley refinement against the exact CDF.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - prob;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

std::pair<double, double> credible_interval(const GaussianParams& params,
                                            double level, Eigen::Index coord) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("credible_interval: level must lie in (0,1)");
  if (coord < 0 || coord >= params.dim())
    throw DomainError("credible_interval: coordinate out of range");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double sd = std::sqrt(params.Sigma(coord, coord));
  return {params.mu[coord] - z * sd, params.mu[coord] + z * sd};
}

std::pair<double, double> credible_interval(const NormalGammaParams& params,
                                            double level, Eigen::Index coord) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("credible_interval: level must lie in (0,1)");
  if (coord < 0 || coord >= params.dim())
    throw DomainError("credible_interval: coordinate out of range");
  constexpr int kDraws = 40000;
  constexpr std::uint64_t kInternalSeed = 0x5eedc0ffee;
  const Eigen::MatrixXd draws = sample(params, kDraws, kInternalSeed);
  std::vector<double> v(draws.col(coord).data(), draws.col(coord).data() + kDraws);
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * (kDraws - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
  };
  return {quantile(0.5 * (1.0 - level)), quantile(0.5 * (1.0 + level))};
}

}  // namespace tavie
