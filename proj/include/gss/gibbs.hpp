#pragma once

#include "gss/core.hpp"
#include "gss/distributions.hpp"
#include "gss/sampling.hpp"

#include <optional>

namespace gss {

// Conditional of group j given everything except (z_j, beta_j), with beta_j
// integrated out. `factor` is the Cholesky factor of
// Sigma_j^{-1} = X_j' W X_j + I / tau2 and `whitened` = L^{-1} X_j' W r_{-j},
// so that mu_j = L^{-T} whitened and mu' Sigma^{-1} mu = |whitened|^2.
struct GroupConditional {
  int group = -1;
  Eigen::LLT<Matrix> factor;
  Vector whitened;
  double log_odds = 0.0;
  bool capped = false;  // activation blocked by the model-size cap

  Vector mean() const { return factor.matrixU().solve(whitened); }
  Matrix covariance() const;
};

// Conditional of group j given the partial residual r_{-j} = Y - X beta +
// X_j beta_j and the weights W.
GroupConditional collapsed_group_conditional(int j, const Matrix& xg, const Vector& weights,
                                              const Vector& partial_residual, const Hyperparams& hyper);

// Standard Gibbs sampler: Y -> s^2 -> (z_j, beta_j) for j = 1..r.
// Maintains residual = Y - X beta incrementally.
class GibbsSampler {
 public:
  GibbsSampler(const GroupedDesign& design, Binary e, Hyperparams hyper);

  void initialize(const InitPolicy& init, Rng& rng);
  // Replaces the state wholesale. beta must respect z.
  void set_state(ChainState state);
  // Fixed (Y, W) mode.
  void freeze_latent(Vector y, Vector s2);
  bool frozen() const { return frozen_; }

  void step_latent_y(Rng& rng);
  void step_scales(Rng& rng);
  GroupConditional group_conditional(int j) const;
  int step_group_indicator(int j, Rng& rng);
  void step_group_beta(int j, Rng& rng);
  void sweep(Rng& rng);

  const ChainState& state() const { return state_; }
  const Vector& residual() const { return residual_; }
  // Largest |residual - (y - X beta)| relative to max(1, |y - X beta|_inf).
  double residual_drift() const;
  void refresh_residual();
  int active_count() const { return active_count_; }

  const GroupedDesign& design() const { return design_; }
  const Hyperparams& hyper() const { return hyper_; }

 private:
  Vector linear_predictor() const { return state_.y - residual_; }

  const GroupedDesign& design_;
  Binary e_;
  Hyperparams hyper_;
  ChainState state_;
  Vector residual_;
  int active_count_ = 0;
  bool frozen_ = false;
  Vector weights_;  // W = diag(1 / s2)
  std::optional<GroupConditional> cached_;
};

PosteriorDraws run_gibbs(const GroupedDesign& design, const Binary& e, const Hyperparams& hyper,
                         const RunOptions& options, std::uint64_t seed);

}  // namespace gss
