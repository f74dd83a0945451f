#pragma once

// Small statistical helpers shared by the unit and acceptance tests.

#include "gss/core.hpp"
#include "gss/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

namespace gss::testing {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Sample mean and covariance of the rows of `draws`.
inline Vector row_mean(const Matrix& draws) { return draws.colwise().mean().transpose(); }

inline Matrix row_covariance(const Matrix& draws) {
  Matrix centered = draws.rowwise() - draws.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
}

// Scaled Student-t density with nu degrees of freedom and scale^2 = s2.
inline double scaled_t_pdf(double x, double nu, double s2) {
  const double c = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) /
                   std::sqrt(nu * std::numbers::pi * s2);
  return c * std::pow(1.0 + x * x / (nu * s2), -(nu + 1.0) / 2.0);
}

inline double logistic_pdf(double x) {
  double e = std::exp(-std::abs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

struct EnergyTest {
  double statistic = 0.0;  // m/2 * energy distance for two samples of size m
  double p_value = 1.0;
  int permutations = 0;
};

// Two-sample energy-distance permutation test on the rows of a and b (equal
// row counts). With labels s_i = +-1 the between-sample distance sum is
// B = (T - s'Ds/2)/2, where T sums all pairs, so every permutation reduces to
// a quadratic form in the distance matrix D. D is streamed in row blocks and
// never stored whole.
inline EnergyTest energy_test(const Matrix& a, const Matrix& b, int permutations, std::uint64_t seed) {
  const Index m = a.rows();
  const Index n = 2 * m;
  Matrix pooled(n, a.cols());
  pooled << a, b;
  const Vector sq = pooled.rowwise().squaredNorm();

  std::vector<int> label(static_cast<std::size_t>(n), 1);
  std::fill(label.begin() + m, label.end(), -1);
  Matrix signs(n, permutations + 1);
  Rng rng(seed);
  for (int k = 0; k <= permutations; ++k) {
    if (k > 0) std::shuffle(label.begin(), label.end(), rng.engine());
    for (Index i = 0; i < n; ++i) signs(i, k) = label[static_cast<std::size_t>(i)];
  }

  Vector quad = Vector::Zero(permutations + 1);
  double total = 0.0;
  const Index block = 256;
  for (Index start = 0; start < n; start += block) {
    const Index rows = std::min(block, n - start);
    Matrix d = -2.0 * pooled.middleRows(start, rows) * pooled.transpose();
    d.colwise() += sq.segment(start, rows);
    d.rowwise() += sq.transpose();
    d = d.cwiseMax(0.0).cwiseSqrt();
    for (Index i = 0; i < rows; ++i) d(i, start + i) = 0.0;
    total += d.sum();
    quad += (signs.middleRows(start, rows).cwiseProduct(d * signs)).colwise().sum().transpose();
  }
  total /= 2.0;

  auto statistic = [&](int k) {
    const double between = 0.5 * (total - 0.5 * quad(k));
    const double e = (4.0 * between - 2.0 * total) / (static_cast<double>(m) * static_cast<double>(m));
    return static_cast<double>(m) / 2.0 * e;
  };
  EnergyTest out;
  out.statistic = statistic(0);
  out.permutations = permutations;
  int exceed = 0;
  for (int k = 1; k <= permutations; ++k)
    if (statistic(k) >= out.statistic) ++exceed;
  out.p_value = (1.0 + exceed) / (1.0 + permutations);
  return out;
}

}  // namespace gss::testing
