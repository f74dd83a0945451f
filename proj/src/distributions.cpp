#include "gss/distributions.hpp"

#include "gss/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace gss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this many standard deviations inverse-CDF sampling loses precision
// and the exponential-proposal rejection sampler takes over.
constexpr double kTailStart = 5.0;

// Standard normal restricted to [a, b] with a >= kTailStart (b may be +inf).
double sample_upper_tail(double a, double b, Rng& rng) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  // mass of the shifted exponential that falls inside [a, b]
  const double window = std::isinf(b) ? 1.0 : -std::expm1(-rate * (b - a));
  for (;;) {
    double z = a - std::log1p(-rng.uniform() * window) / rate;
    double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d) && z > a && z < b) return z;
  }
}

double sample_standard_truncated(double a, double b, Rng& rng) {
  if (std::isinf(a) && std::isinf(b)) return rng.normal();
  if (a >= kTailStart) return sample_upper_tail(a, b, rng);
  if (b <= -kTailStart) return -sample_upper_tail(-b, -a, rng);

  double z;
  if (a > 0.0) {
    // upper side: invert the survival function to keep precision
    double sa = 0.5 * std::erfc(a / std::numbers::sqrt2);
    double sb = 0.5 * std::erfc(b / std::numbers::sqrt2);
    double u = sb + (sa - sb) * rng.uniform();
    z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
  } else {
    double ca = normal_cdf(a);
    double cb = normal_cdf(b);
    double u = ca + (cb - ca) * rng.uniform();
    z = normal_quantile(u);
  }
  if (!(z > a)) z = std::nextafter(a, kInf);
  if (!(z < b)) z = std::nextafter(b, -kInf);
  return z;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_log_cdf(double x) {
  if (x > -30.0) return std::log(normal_cdf(x));
  // Mills-ratio asymptotic expansion
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw UsageError("normal_quantile: probability outside [0, 1]");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng) {
  if (std::isnan(mean) || std::isnan(lower) || std::isnan(upper) || !std::isfinite(mean)) {
    throw UsageError("sample_truncated_normal: non-finite mean or NaN bound");
  }
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw UsageError("sample_truncated_normal: sd must be positive and finite");
  }
  if (!(lower < upper)) throw UsageError("sample_truncated_normal: requires lower < upper");

  double a = (lower - mean) / sd;
  double b = (upper - mean) / sd;
  double x = mean + sd * sample_standard_truncated(a, b, rng);
  // guard against rounding in mean + sd * z
  if (!(x > lower)) x = std::nextafter(lower, kInf);
  if (!(x < upper)) x = std::nextafter(upper, -kInf);
  return x;
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw UsageError("sample_inverse_gamma: shape must be positive");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw UsageError("sample_inverse_gamma: scale must be positive");
  }
  double g = rng.gamma(shape, scale);
  double x = 1.0 / g;
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  if (!std::isfinite(x)) x = std::numeric_limits<double>::max();
  return x;
}

Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw UsageError(std::string(what) + ": matrix is not square");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw UsageError(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Matrix> ldlt(m);
    double pivot = ldlt.vectorD().minCoeff();
    throw IllConditionedError(std::string(what) + ": Cholesky factorization failed (min pivot " +
                                  std::to_string(pivot) + ")",
                              pivot);
  }
  return llt;
}

Vector sample_mvn(const Vector& mean, const Matrix& m, CovarianceForm form, Rng& rng) {
  if (m.rows() != mean.size()) throw UsageError("sample_mvn: dimension mismatch");
  auto llt = cholesky_or_throw(m, "sample_mvn");
  Vector xi = rng.normal_vector(mean.size());
  if (form == CovarianceForm::covariance) return mean + llt.matrixL() * xi;
  // precision Q = L L': x = mean + L^{-T} xi has covariance Q^{-1}
  return mean + llt.matrixU().solve(xi);
}

Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Rng& rng) {
  if (precision.rows() != linear.size()) {
    throw UsageError("sample_mvn_canonical: dimension mismatch");
  }
  auto llt = cholesky_or_throw(precision, "sample_mvn_canonical");
  Vector v = llt.matrixL().solve(linear);
  v += rng.normal_vector(linear.size());
  return llt.matrixU().solve(v);
}

Vector sample_mvn_fast(const Matrix& phi, const Vector& d, const Vector& target, Rng& rng) {
  const Index n = phi.rows();
  const Index p = phi.cols();
  if (d.size() != p || target.size() != n) throw UsageError("sample_mvn_fast: dimension mismatch");
  if (!(d.array() > 0.0).all()) throw UsageError("sample_mvn_fast: d must be strictly positive");

  Vector sqrt_d = d.array().sqrt();
  Vector u = sqrt_d.cwiseProduct(rng.normal_vector(p));
  Vector delta = rng.normal_vector(n);
  Vector v = phi * u + delta;

  Matrix scaled = phi * sqrt_d.asDiagonal();
  Matrix inner = Matrix::Identity(n, n);
  inner.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  inner.triangularView<Eigen::StrictlyUpper>() = inner.transpose();
  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("sample_mvn_fast: inner n x n system is singular", 0.0);
  }
  Vector w = llt.solve(target - v);
  return u + d.cwiseProduct(phi.transpose() * w);
}

int bernoulli_from_log_odds(double log_odds, Rng& rng) {
  if (std::isnan(log_odds)) throw UsageError("bernoulli_from_log_odds: NaN log-odds");
  if (log_odds == kInf) return 1;
  if (log_odds == -kInf) return 0;
  double u = rng.uniform();
  return (std::log(u) - std::log1p(-u)) < log_odds ? 1 : 0;
}

}  // namespace gss
