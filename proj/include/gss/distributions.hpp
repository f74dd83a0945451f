#pragma once

#include "gss/core.hpp"

#include <cstdint>
#include <random>

namespace gss {

// Seeded generator passed explicitly into every sampling routine. Equal seeds
// give equal draw sequences within one build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() { return normal_(engine_); }
  // Gamma with the given shape and rate.
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  // Uniform integer in [0, n).
  Index uniform_index(Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
  }
  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// splitmix64 mix of (base, stream); integer-only so stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

double normal_pdf(double x);
double normal_cdf(double x);
// log Phi(x), accurate far into the lower tail.
double normal_log_cdf(double x);
double normal_quantile(double p);
double sigmoid(double x);
// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

// N(mean, sd^2) conditioned on (lower, upper). Bounds may be infinite. The
// result lies strictly inside the interval even when the interval carries
// negligible probability mass.
double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng);

// Density proportional to x^(-shape-1) exp(-scale/x).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

enum class CovarianceForm { covariance, precision };

// Lower Cholesky factor. Throws UsageError for non-symmetric input and
// IllConditionedError (carrying the smallest pivot) if not positive definite.
Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& m, const char* what);

Vector sample_mvn(const Vector& mean, const Matrix& m, CovarianceForm form, Rng& rng);

// Draw from N(Q^{-1} b, Q^{-1}) given the precision Q and linear term b.
Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Rng& rng);

// Draw from N((Phi'Phi + D^-1)^-1 Phi' target, (Phi'Phi + D^-1)^-1) at the
// cost of an n x n solve (n = rows of phi).
Vector sample_mvn_fast(const Matrix& phi, const Vector& d, const Vector& target, Rng& rng);

// 1 with probability 1 / (1 + exp(-log_odds)).
int bernoulli_from_log_odds(double log_odds, Rng& rng);

}  // namespace gss
