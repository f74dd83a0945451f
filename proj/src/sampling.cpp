#include "gss/sampling.hpp"

#include "gss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gss {

GroupSet choose_initial_groups(const InitPolicy& init, int r, Rng& rng) {
  if (init.active) {
    GroupSet g = *init.active;
    std::sort(g.begin(), g.end());
    for (int j : g) {
      if (j < 0 || j >= r) throw UsageError("initial active group out of range");
    }
    return g;
  }
  int k = std::clamp(init.n_active, 0, r);
  std::vector<int> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates
  for (int i = 0; i < k; ++i) {
    auto pick = i + static_cast<int>(rng.uniform_index(r - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick)]);
  }
  GroupSet g(idx.begin(), idx.begin() + k);
  std::sort(g.begin(), g.end());
  return g;
}

void draw_latent_y(Vector& y, const Vector& eta, const Vector& s2, const Binary& e, Rng& rng) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < y.size(); ++i) {
    double sd = std::sqrt(s2(i));
    y(i) = e(i) ? sample_truncated_normal(eta(i), sd, 0.0, inf, rng)
                : sample_truncated_normal(eta(i), sd, -inf, 0.0, rng);
  }
}

void draw_scales(Vector& s2, const Vector& residual, const Hyperparams& hyper, Rng& rng) {
  const double shape = 0.5 * (1.0 + hyper.nu);
  const double base = hyper.sigma02 * hyper.nu;
  for (Index i = 0; i < s2.size(); ++i) {
    double rr = residual(i);
    s2(i) = sample_inverse_gamma(shape, 0.5 * (rr * rr + base), rng);
  }
}

void init_latent(Vector& y, Vector& s2, const Binary& e, const Hyperparams& hyper) {
  y.resize(e.size());
  for (Index i = 0; i < e.size(); ++i) y(i) = e(i) ? 1.0 : -1.0;
  s2 = Vector::Constant(e.size(), hyper.prior_scale_mean());
}

void check_run_inputs(const GroupedDesign& design, const Binary& e, const RunOptions& options) {
  if (e.size() != design.n()) {
    throw ConsistencyError("response length " + std::to_string(e.size()) +
                           " does not match design rows " + std::to_string(design.n()));
  }
  for (Index i = 0; i < e.size(); ++i) {
    if (e(i) != 0 && e(i) != 1) throw ConsistencyError("response must be 0/1");
  }
  if (options.n_burnin < 0 || options.n_samples < 0) {
    throw UsageError("burn-in and sample counts must be nonnegative");
  }
  if (options.frozen) {
    const auto& f = *options.frozen;
    if (f.y.size() != design.n() || f.s2.size() != design.n()) {
      throw ConsistencyError("frozen latent vectors must have length n");
    }
    if (!(f.s2.array() > 0.0).all()) throw UsageError("frozen scales must be positive");
  }
}

}  // namespace gss
