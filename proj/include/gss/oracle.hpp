#pragma once

#include "gss/core.hpp"
#include "gss/sampling.hpp"
#include "gss/simulate.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gss {

// Exact posterior over all 2^r models when (Y, W) are held fixed, so that
// Y | Z = k ~ N(0, tau2 X_k X_k' + W^{-1}).
struct EnumeratedPosterior {
  int r = 0;
  // models[m] has group j active iff bit j of m is set.
  std::vector<GroupSet> models;
  Vector log_marginals;  // log N(Y; 0, tau2 X_k X_k' + W^-1)
  Vector probs;

  double prob_of(const GroupSet& model) const;
};

constexpr int kMaxEnumerationGroups = 12;

// Log marginal through the |G_k|-dimensional inner system.
double log_marginal_factored(const GroupedDesign& design, const Vector& y, const Vector& weights,
                             const GroupSet& model, double tau2);
// Same quantity through a dense n x n Cholesky of tau2 X_k X_k' + W^{-1}.
double log_marginal_direct(const GroupedDesign& design, const Vector& y, const Vector& weights,
                           const GroupSet& model, double tau2);

// `weights` is the diagonal of W (= 1 / s2). Throws SizeError for r > 12.
EnumeratedPosterior enumerate_posterior(const GroupedDesign& design, const Vector& y,
                                        const Vector& weights, const Hyperparams& hyper);

struct OracleComparison {
  double tv = 0.0;
  Vector empirical;  // indexed like EnumeratedPosterior::models
  EnumeratedPosterior exact;
  long n_sweeps = 0;
};

std::size_t model_bitmask(const GroupSet& model);

// Runs the engine's coefficient updates with (Y, W) frozen and returns the
// total-variation distance between visited-model frequencies and the exact
// posterior. With zero sweeps the initial state is compared.
OracleComparison compare_chain_to_oracle(Engine engine, const GroupedDesign& design,
                                         const Vector& y, const Vector& weights,
                                         const Hyperparams& hyper, long n_sweeps,
                                         std::uint64_t seed, const InitPolicy& init = {});

struct PosteriorRatioTrace {
  double true_model_prob = 0.0;
  bool true_model_visited = false;
  // pattern key -> estimated pi(Z=k|E) / pi(Z=t|E), k != t; +inf when t was
  // never visited.
  std::map<std::string, double> ratios;
  // Estimated mass on strict supersets of t.
  double superset_prob = 0.0;
};

PosteriorRatioTrace posterior_ratio_trace(const PosteriorDraws& draws, const GroupSet& truth);

struct ConditionReport {
  double m_n = 0.0;
  double lambda_hat = 0.0;  // sampled min restricted eigenvalue of n^-1 H_n(beta0_k)
  double Lambda_hat = 0.0;  // sampled max eigenvalue of n^-1 X_k'X_k, |k| <= |t|
  double beta_min_lhs = 0.0;
  double beta_min_rhs = 0.0;
  double c0_ratio = 0.0;
  bool true_size_within_mn = false;
  bool tau2_rule_ok = false;
  bool q_rule_ok = false;
  double d = 0.0;
  double d_prime = 1.0;
  int n_probe = 0;
  Index true_size = 0;  // |G_t|
};

double effective_dimension(Index n, int r, Index p, double d_prime);

// Eigenvalue quantities are estimated over n_probe random models, so
// lambda_hat is an upper estimate of the true minimum and Lambda_hat a lower
// estimate of the true maximum.
ConditionReport condition_report(const SimDataset& data, const Hyperparams& hyper, double d,
                                 double d_prime, int n_probe, std::uint64_t seed,
                                 double delta = 0.01);

}  // namespace gss
