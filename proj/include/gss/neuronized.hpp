#pragma once

#include "gss/core.hpp"
#include "gss/distributions.hpp"
#include "gss/sampling.hpp"

#include <vector>

namespace gss {

// Sampler for the reparameterization beta_{G_j} = 1(alpha_j >= alpha0) w_{G_j}
// with alpha_j ~ N(0, 1) and w ~ N(0, tau2 I). Each sweep draws w jointly,
// then every alpha_j from its two-piece truncated-normal conditional, then
// the latent responses and scales. With block moves enabled, each alpha_j
// draw is followed by a joint (alpha_j, w_{G_j}) update with w_{G_j}
// integrated out of the side choice; this leaves the posterior unchanged and
// lets inactive groups re-enter without waiting for a well-aligned prior
// draw of their weights.
class NeuronizedSampler {
 public:
  NeuronizedSampler(const GroupedDesign& design, Binary e, Hyperparams hyper);

  void initialize(const InitPolicy& init, Rng& rng);
  // alpha (length r), w (length p), y, s2 (length n). Builds the mask and
  // the residual from them.
  void set_state(Vector alpha, Vector w, Vector y, Vector s2);
  void freeze_latent(Vector y, Vector s2);
  bool frozen() const { return frozen_; }

  void set_fast_threshold(Index threshold) { fast_threshold_ = threshold; }
  void set_full_weight_system(bool full) { full_weight_system_ = full; }
  void set_block_moves(bool on) { block_moves_ = on; }

  void step_weights(Rng& rng);
  // Log-odds that alpha_j falls below alpha0 (group inactive) given the rest.
  double inactive_log_odds(int j) const;
  void step_alpha(int j, Rng& rng);
  void step_block(int j, Rng& rng);
  void step_latent_y(Rng& rng);
  void step_scales(Rng& rng);
  void sweep(Rng& rng);

  const Vector& alpha() const { return alpha_; }
  const Vector& weights() const { return w_; }
  const Vector& y() const { return y_; }
  const Vector& s2() const { return s2_; }
  bool active(int j) const { return active_[static_cast<std::size_t>(j)] != 0; }
  // Per-coordinate 0/1 mask D_alpha.
  Vector mask() const;
  Vector beta() const;
  Binary z() const;
  ChainState state() const;
  // r_e = Y - X D_alpha w.
  const Vector& residual() const { return residual_; }
  double residual_drift() const;
  void refresh_residual();
  int active_count() const { return active_count_; }

 private:
  std::vector<Index> active_columns() const;
  void set_active(int j, bool on);

  const GroupedDesign& design_;
  Binary e_;
  Hyperparams hyper_;
  Vector alpha_;
  Vector w_;
  Vector y_;
  Vector s2_;
  Vector weights_;  // 1 / s2
  std::vector<char> active_;
  int active_count_ = 0;
  Vector residual_;
  bool frozen_ = false;
  Index fast_threshold_;
  bool full_weight_system_ = false;
  bool block_moves_ = true;
};

PosteriorDraws run_neuronized(const GroupedDesign& design, const Binary& e,
                              const Hyperparams& hyper, const RunOptions& options,
                              std::uint64_t seed);

// Dispatches on the engine.
PosteriorDraws run_engine(Engine engine, const GroupedDesign& design, const Binary& e,
                          const Hyperparams& hyper, const RunOptions& options, std::uint64_t seed);

}  // namespace gss
