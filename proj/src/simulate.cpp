#include "gss/simulate.hpp"

#include "gss/errors.hpp"

#include <cmath>

namespace gss {

std::string to_string(Covariance c) {
  switch (c) {
    case Covariance::isotropic: return "isotropic";
    case Covariance::compound_symmetry: return "cs";
    case Covariance::ar1: return "ar1";
  }
  return "isotropic";
}

Covariance covariance_from_string(const std::string& name) {
  if (name == "isotropic" || name == "iso") return Covariance::isotropic;
  if (name == "cs" || name == "compound_symmetry") return Covariance::compound_symmetry;
  if (name == "ar1") return Covariance::ar1;
  throw UsageError("unknown covariance '" + name + "' (expected isotropic, cs or ar1)");
}

SignalSetting setting_from_int(int setting) {
  if (setting < 1 || setting > 4) {
    throw UsageError("unknown setting " + std::to_string(setting) + " (expected 1-4)");
  }
  return static_cast<SignalSetting>(setting);
}

SimConfig design_config(int design, SignalSetting setting, Covariance cov, std::uint64_t seed) {
  SimConfig c;
  switch (design) {
    case 1: c.r = 50; c.n_active = 3; break;
    case 2: c.r = 50; c.n_active = 6; break;
    case 3: c.r = 100; c.n_active = 3; break;
    default: throw UsageError("unknown design " + std::to_string(design) + " (expected 1-3)");
  }
  c.setting = setting;
  c.covariance = cov;
  c.seed = seed;
  return c;
}

Partition gen_groups(const SimConfig& config, Rng& rng) {
  const auto& choices = config.group_size_choices;
  if (choices.empty()) throw UsageError("group_size_choices is empty");
  Partition groups(static_cast<std::size_t>(config.r));
  Index next = 0;
  for (auto& g : groups) {
    int size = choices[static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(choices.size())))];
    for (int k = 0; k < size; ++k) g.push_back(next++);
  }
  return groups;
}

Matrix gen_covariates(Index n_rows, Index p, Covariance covariance, double rho, Rng& rng) {
  Matrix x(n_rows, p);
  switch (covariance) {
    case Covariance::isotropic:
      for (Index i = 0; i < n_rows; ++i)
        for (Index c = 0; c < p; ++c) x(i, c) = rng.normal();
      break;
    case Covariance::compound_symmetry: {
      // shared factor: corr(x_a, x_b) = rho for a != b
      double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
      for (Index i = 0; i < n_rows; ++i) {
        double common = rng.normal();
        for (Index c = 0; c < p; ++c) x(i, c) = a * common + b * rng.normal();
      }
      break;
    }
    case Covariance::ar1: {
      double b = std::sqrt(1.0 - rho * rho);
      for (Index i = 0; i < n_rows; ++i) {
        x(i, 0) = rng.normal();
        for (Index c = 1; c < p; ++c) x(i, c) = rho * x(i, c - 1) + b * rng.normal();
      }
      break;
    }
  }
  return x;
}

Binary gen_response(const Matrix& x, const Vector& beta0, Rng& rng) {
  if (x.cols() != beta0.size()) throw UsageError("gen_response: dimension mismatch");
  Vector eta = x * beta0;
  Binary e(x.rows());
  for (Index i = 0; i < x.rows(); ++i) e(i) = rng.uniform() < sigmoid(eta(i)) ? 1 : 0;
  return e;
}

Vector gen_beta0(const SimConfig& config, const Partition& groups, Rng& rng) {
  Index p = 0;
  for (const auto& g : groups) p += static_cast<Index>(g.size());
  Vector beta = Vector::Zero(p);
  for (int j = 0; j < config.n_active; ++j) {
    for (Index c : groups[static_cast<std::size_t>(j)]) {
      switch (config.setting) {
        case SignalSetting::uniform_low: beta(c) = 0.5 + rng.uniform(); break;
        case SignalSetting::constant_low: beta(c) = 1.5; break;
        case SignalSetting::uniform_high: beta(c) = 1.5 + 1.5 * rng.uniform(); break;
        case SignalSetting::constant_high: beta(c) = 3.0; break;
      }
    }
  }
  return beta;
}

SimDataset gen_dataset(const SimConfig& config) {
  if (config.n_active < 0 || config.n_active > config.r) {
    throw UsageError("n_active must lie in [0, r]");
  }
  if (config.n < 2 || config.n_test < 0 || config.r < 1) throw UsageError("invalid SimConfig sizes");

  Rng rng(config.seed);
  Partition groups = gen_groups(config, rng);
  Vector beta0 = gen_beta0(config, groups, rng);
  const Index p = beta0.size();

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng sub(derive_seed(config.seed, static_cast<std::uint64_t>(attempt)));
    Matrix x = gen_covariates(config.n, p, config.covariance, config.rho, sub);
    Binary e = gen_response(x, beta0, sub);
    if (e.sum() == 0 || e.sum() == e.size()) continue;

    Matrix x_test = gen_covariates(config.n_test, p, config.covariance, config.rho, sub);
    Binary e_test = gen_response(x_test, beta0, sub);
    Vector eta_test = x_test * beta0;

    GroupedDesign design = validate_design(x, groups);
    Matrix test_x = design.transform(x_test);
    GroupSet truth;
    for (int j = 0; j < config.n_active; ++j) truth.push_back(j);

    Vector prob(eta_test.size());
    for (Index i = 0; i < eta_test.size(); ++i) prob(i) = sigmoid(eta_test(i));
    return SimDataset{std::move(design), std::move(x), std::move(e), std::move(truth),
                      std::move(beta0), std::move(x_test), std::move(test_x),
                      std::move(e_test), std::move(prob), config.seed, attempt + 1};
  }
  throw ConsistencyError("gen_dataset: every attempt produced a constant response");
}

}  // namespace gss
