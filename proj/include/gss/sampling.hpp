#pragma once

#include "gss/core.hpp"
#include "gss/distributions.hpp"

#include <cstdint>
#include <optional>

namespace gss {

// Starting point for either engine. Only the active-group choice has a
// prescribed default (three random groups); the rest are fixed conventions.
struct InitPolicy {
  int n_active = 3;
  // Overrides the random choice when set.
  std::optional<GroupSet> active;
  // Active coefficients (weights, for the neuronized engine) start at N(0, sd^2).
  double coef_sd = 0.1;
  // Neuronized engine: alpha_j = alpha0 +/- this offset.
  double alpha_offset = 0.5;
};

// Holds (Y, W) fixed; the chain then only updates the coefficient blocks.
struct FrozenLatent {
  Vector y;
  Vector s2;
};

struct RunOptions {
  long n_burnin = 2000;
  long n_samples = 2000;
  InitPolicy init;
  bool store_beta = false;
  std::optional<FrozenLatent> frozen;
  // Neuronized weight update switches to the fast sampler above this
  // dimension; defaults to n.
  std::optional<Index> fast_threshold;
  // Neuronized engine: run the fast sampler on the full masked p-dimensional
  // system instead of the reduced active block.
  bool full_weight_system = false;
  // Neuronized engine: add the collapsed (alpha_j, w_{G_j}) block update
  // after each alpha_j draw.
  bool block_moves = true;
  // Full residual recomputation period, in sweeps.
  long refresh_every = 100;
};

GroupSet choose_initial_groups(const InitPolicy& init, int r, Rng& rng);

// y_i ~ N(eta_i, s2_i) truncated to (0, inf) when e_i = 1, (-inf, 0) otherwise.
void draw_latent_y(Vector& y, const Vector& eta, const Vector& s2, const Binary& e, Rng& rng);

// s2_i ~ InvGamma((1 + nu)/2, ((y_i - eta_i)^2 + sigma02 nu)/2), given the
// residuals y - eta.
void draw_scales(Vector& s2, const Vector& residual, const Hyperparams& hyper, Rng& rng);

// Initial latent values: y_i = +/-1 by the sign of e_i, s2_i at its prior mean.
void init_latent(Vector& y, Vector& s2, const Binary& e, const Hyperparams& hyper);

void check_run_inputs(const GroupedDesign& design, const Binary& e, const RunOptions& options);

}  // namespace gss
