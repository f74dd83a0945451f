#pragma once

#include "gss/core.hpp"
#include "gss/distributions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gss {

enum class Covariance { isotropic, compound_symmetry, ar1 };

// Signal settings for the active coefficients.
enum class SignalSetting {
  uniform_low = 1,   // Unif(0.5, 1.5)
  constant_low = 2,  // 1.5
  uniform_high = 3,  // Unif(1.5, 3)
  constant_high = 4  // 3
};

std::string to_string(Covariance c);
Covariance covariance_from_string(const std::string& name);
SignalSetting setting_from_int(int setting);

struct SimConfig {
  Index n = 100;
  int r = 50;
  int n_active = 3;
  Covariance covariance = Covariance::isotropic;
  SignalSetting setting = SignalSetting::constant_high;
  std::vector<int> group_size_choices{4, 5, 6};
  double rho = 0.5;
  Index n_test = 100;
  std::uint64_t seed = 1;
};

// Design 1: r=50, |t|=3. Design 2: r=50, |t|=6. Design 3: r=100, |t|=3.
SimConfig design_config(int design, SignalSetting setting, Covariance cov, std::uint64_t seed);

struct SimDataset {
  GroupedDesign design;  // standardized training covariates
  Matrix x_raw;
  Binary e;
  GroupSet true_model;
  Vector beta0;  // on the raw covariate scale
  Matrix x_test_raw;
  Matrix test_x;  // test covariates standardized with training moments
  Binary e_test;
  Vector true_prob_test;
  std::uint64_t seed = 0;
  int attempts = 1;
};

// Contiguous groups with sizes drawn uniformly from the configured choices.
Partition gen_groups(const SimConfig& config, Rng& rng);

// n_rows draws of x ~ N_p(0, Sigma) for the configured covariance.
Matrix gen_covariates(Index n_rows, Index p, Covariance covariance, double rho, Rng& rng);

// Independent E_i ~ Bernoulli(sigmoid(x_i' beta0)).
Binary gen_response(const Matrix& x, const Vector& beta0, Rng& rng);

// Coefficients for the first n_active groups; zero elsewhere.
Vector gen_beta0(const SimConfig& config, const Partition& groups, Rng& rng);

// Regenerates (with a fresh sub-seed) up to 100 times when every training
// response is equal; throws ConsistencyError after that.
SimDataset gen_dataset(const SimConfig& config);

}  // namespace gss
