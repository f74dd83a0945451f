#pragma once

// Small reproducible problem instances shared by the tests.

#include "gss/core.hpp"
#include "gss/distributions.hpp"
#include "gss/inference.hpp"
#include "gss/oracle.hpp"

#include <cmath>

namespace gss::testing {

// A three-group problem with (Y, W) held fixed. The signal is moderate so
// that the exact posterior spreads its mass over several models.
struct FrozenInstance {
  GroupedDesign design;
  Vector y;
  Vector weights;
  Hyperparams hyper;
};

inline FrozenInstance frozen_instance(std::uint64_t seed, Index n = 60) {
  Rng rng(seed);
  Partition groups{{0, 1}, {2, 3, 4}, {5, 6}};
  Matrix x(n, 7);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 7; ++c) x(i, c) = rng.normal();
  GroupedDesign design = GroupedDesign::standardize(x, groups);
  Vector beta(7);
  beta << 0.45, -0.3, 0.15, 0.0, 0.1, 0.0, 0.0;
  Hyperparams hyper = Hyperparams::make(1.0, 0.4);
  Vector s2(n), y(n);
  for (Index i = 0; i < n; ++i) {
    s2(i) = sample_inverse_gamma(hyper.nu / 2.0, hyper.sigma02 * hyper.nu / 2.0, rng);
    y(i) = design.x().row(i).dot(beta) + std::sqrt(s2(i)) * rng.normal();
  }
  return FrozenInstance{std::move(design), std::move(y), s2.cwiseInverse(), hyper};
}

// Total variation between visited-model frequencies and an enumerated
// posterior.
inline double tv_distance(const BinaryMatrix& z_draws, const EnumeratedPosterior& exact) {
  Vector freq = Vector::Zero(exact.probs.size());
  for (Index s = 0; s < z_draws.rows(); ++s) {
    std::size_t m = 0;
    for (Index j = 0; j < z_draws.cols(); ++j)
      if (z_draws(s, j)) m |= std::size_t{1} << j;
    freq(static_cast<Index>(m)) += 1.0;
  }
  freq /= static_cast<double>(z_draws.rows());
  return 0.5 * (freq - exact.probs).cwiseAbs().sum();
}

inline Binary signs_of(const Vector& y) {
  Binary e(y.size());
  for (Index i = 0; i < y.size(); ++i) e(i) = y(i) >= 0.0 ? 1 : 0;
  return e;
}

}  // namespace gss::testing
