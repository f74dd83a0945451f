#include "gss/neuronized.hpp"

#include "gss/errors.hpp"
#include "gss/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace gss {

NeuronizedSampler::NeuronizedSampler(const GroupedDesign& design, Binary e, Hyperparams hyper)
    : design_(design), e_(std::move(e)), hyper_(std::move(hyper)), fast_threshold_(design.n()) {
  if (e_.size() != design_.n()) throw ConsistencyError("response length does not match design");
  alpha_ = Vector::Constant(design_.r(), hyper_.alpha0 - 1.0);
  w_ = Vector::Zero(design_.p());
  init_latent(y_, s2_, e_, hyper_);
  weights_ = s2_.cwiseInverse();
  active_.assign(static_cast<std::size_t>(design_.r()), 0);
  residual_ = y_;
}

void NeuronizedSampler::initialize(const InitPolicy& init, Rng& rng) {
  GroupSet chosen = choose_initial_groups(init, design_.r(), rng);
  Vector alpha = Vector::Constant(design_.r(), hyper_.alpha0 - init.alpha_offset);
  for (int j : chosen) alpha(j) = hyper_.alpha0 + init.alpha_offset;
  Vector w = init.coef_sd * rng.normal_vector(design_.p());
  Vector y = y_, s2 = s2_;
  if (!frozen_) init_latent(y, s2, e_, hyper_);
  set_state(std::move(alpha), std::move(w), std::move(y), std::move(s2));
}

void NeuronizedSampler::set_state(Vector alpha, Vector w, Vector y, Vector s2) {
  if (alpha.size() != design_.r() || w.size() != design_.p() || y.size() != design_.n() ||
      s2.size() != design_.n()) {
    throw ConsistencyError("neuronized state dimensions do not match the design");
  }
  alpha_ = std::move(alpha);
  w_ = std::move(w);
  y_ = std::move(y);
  s2_ = std::move(s2);
  weights_ = s2_.cwiseInverse();
  active_count_ = 0;
  for (int j = 0; j < design_.r(); ++j) {
    active_[static_cast<std::size_t>(j)] = alpha_(j) >= hyper_.alpha0 ? 1 : 0;
    active_count_ += active_[static_cast<std::size_t>(j)];
  }
  refresh_residual();
}

void NeuronizedSampler::freeze_latent(Vector y, Vector s2) {
  if (y.size() != design_.n() || s2.size() != design_.n()) {
    throw ConsistencyError("frozen latent vectors must have length n");
  }
  y_ = std::move(y);
  s2_ = std::move(s2);
  weights_ = s2_.cwiseInverse();
  frozen_ = true;
  refresh_residual();
}

Vector NeuronizedSampler::mask() const {
  Vector m = Vector::Zero(design_.p());
  for (int j = 0; j < design_.r(); ++j) {
    if (active(j)) {
      for (Index c : design_.group(j)) m(c) = 1.0;
    }
  }
  return m;
}

Vector NeuronizedSampler::beta() const { return mask().cwiseProduct(w_); }

Binary NeuronizedSampler::z() const {
  Binary z(design_.r());
  for (int j = 0; j < design_.r(); ++j) z(j) = active(j) ? 1 : 0;
  return z;
}

ChainState NeuronizedSampler::state() const {
  return ChainState{beta(), z(), y_, s2_, alpha_, w_};
}

void NeuronizedSampler::refresh_residual() { residual_ = y_ - design_.x() * beta(); }

double NeuronizedSampler::residual_drift() const {
  Vector exact = y_ - design_.x() * beta();
  double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  return (residual_ - exact).cwiseAbs().maxCoeff() / scale;
}

std::vector<Index> NeuronizedSampler::active_columns() const {
  std::vector<Index> cols;
  for (int j = 0; j < design_.r(); ++j) {
    if (active(j)) cols.insert(cols.end(), design_.group(j).begin(), design_.group(j).end());
  }
  return cols;
}

void NeuronizedSampler::set_active(int j, bool on) {
  char& a = active_[static_cast<std::size_t>(j)];
  active_count_ += static_cast<int>(on) - static_cast<int>(a);
  a = on ? 1 : 0;
}

void NeuronizedSampler::step_weights(Rng& rng) {
  const Index n = design_.n();
  const Index p = design_.p();
  Vector sqrt_w = weights_.cwiseSqrt();

  if (full_weight_system_) {
    // Phi = W^{1/2} X D_alpha over all p coordinates
    Matrix phi = sqrt_w.asDiagonal() * design_.x() * mask().asDiagonal();
    w_ = sample_mvn_fast(phi, Vector::Constant(p, hyper_.tau2), sqrt_w.cwiseProduct(y_), rng);
    refresh_residual();
    return;
  }

  // Masked coordinates decouple: their rows and columns of the precision are
  // I / tau2, so they are drawn from the prior.
  const double prior_sd = std::sqrt(hyper_.tau2);
  for (Index c = 0; c < p; ++c) w_(c) = prior_sd * rng.normal();

  std::vector<Index> cols = active_columns();
  const Index k = static_cast<Index>(cols.size());
  if (k > 0) {
    Matrix xa(n, k);
    for (Index c = 0; c < k; ++c) xa.col(c) = design_.x().col(cols[static_cast<std::size_t>(c)]);
    Vector wa;
    if (k > fast_threshold_) {
      Matrix phi = sqrt_w.asDiagonal() * xa;
      wa = sample_mvn_fast(phi, Vector::Constant(k, hyper_.tau2), sqrt_w.cwiseProduct(y_), rng);
    } else {
      Matrix xw = xa.array().colwise() * weights_.array();
      Matrix precision = xw.transpose() * xa;
      precision.diagonal().array() += 1.0 / hyper_.tau2;
      wa = sample_mvn_canonical(precision, xw.transpose() * y_, rng);
    }
    for (Index c = 0; c < k; ++c) w_(cols[static_cast<std::size_t>(c)]) = wa(c);
  }
  refresh_residual();
}

double NeuronizedSampler::inactive_log_odds(int j) const {
  const Matrix& xg = design_.block(j);
  Vector fit = xg * design_.gather(w_, j);  // X_j w_j
  Vector r_j = residual_;
  if (active(j)) r_j += fit;
  Vector wfit = fit.cwiseProduct(weights_);
  // log Phi(a0) - log(1 - Phi(a0)) + [(r_j - Xw)'W(r_j - Xw) - r_j'W r_j] / 2
  double quad_gain = 0.5 * wfit.dot(fit) - wfit.dot(r_j);
  return -hyper_.log_prior_odds() + quad_gain;
}

void NeuronizedSampler::step_alpha(int j, Rng& rng) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const bool was_active = active(j);
  bool blocked = hyper_.max_model_groups && !was_active &&
                 active_count_ + 1 > *hyper_.max_model_groups;
  int lower = blocked ? 1 : bernoulli_from_log_odds(inactive_log_odds(j), rng);
  double a = lower ? sample_truncated_normal(0.0, 1.0, -inf, hyper_.alpha0, rng)
                   : sample_truncated_normal(0.0, 1.0, hyper_.alpha0, inf, rng);
  alpha_(j) = a;
  const bool now_active = a >= hyper_.alpha0;
  if (now_active != was_active) {
    Vector fit = design_.block(j) * design_.gather(w_, j);
    if (now_active) {
      residual_ -= fit;
    } else {
      residual_ += fit;
    }
    set_active(j, now_active);
  }
}

void NeuronizedSampler::step_block(int j, Rng& rng) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const Matrix& xg = design_.block(j);
  const bool was_active = active(j);
  Vector partial = residual_;
  if (was_active) partial.noalias() += xg * design_.gather(w_, j);
  GroupConditional c = collapsed_group_conditional(j, xg, weights_, partial, hyper_);
  bool blocked = hyper_.max_model_groups && !was_active &&
                 active_count_ + 1 > *hyper_.max_model_groups;
  const bool on = !blocked && bernoulli_from_log_odds(c.log_odds, rng);
  const Index k = xg.cols();
  Vector wg;
  if (on) {
    alpha_(j) = sample_truncated_normal(0.0, 1.0, hyper_.alpha0, inf, rng);
    wg = c.factor.matrixU().solve(c.whitened + rng.normal_vector(k));
    residual_ = partial - xg * wg;
  } else {
    alpha_(j) = sample_truncated_normal(0.0, 1.0, -inf, hyper_.alpha0, rng);
    wg = std::sqrt(hyper_.tau2) * rng.normal_vector(k);
    residual_ = std::move(partial);
  }
  design_.scatter(w_, j, wg);
  set_active(j, on);
}

void NeuronizedSampler::step_latent_y(Rng& rng) {
  Vector eta = y_ - residual_;
  draw_latent_y(y_, eta, s2_, e_, rng);
  residual_ = y_ - eta;
}

void NeuronizedSampler::step_scales(Rng& rng) {
  draw_scales(s2_, residual_, hyper_, rng);
  weights_ = s2_.cwiseInverse();
}

void NeuronizedSampler::sweep(Rng& rng) {
  step_weights(rng);
  for (int j = 0; j < design_.r(); ++j) {
    step_alpha(j, rng);
    if (block_moves_) step_block(j, rng);
  }
  if (!frozen_) {
    step_latent_y(rng);
    step_scales(rng);
  }
}

PosteriorDraws run_neuronized(const GroupedDesign& design, const Binary& e,
                              const Hyperparams& hyper, const RunOptions& options,
                              std::uint64_t seed) {
  check_run_inputs(design, e, options);
  auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  NeuronizedSampler sampler(design, e, hyper);
  if (options.fast_threshold) sampler.set_fast_threshold(*options.fast_threshold);
  sampler.set_full_weight_system(options.full_weight_system);
  sampler.set_block_moves(options.block_moves);
  if (options.frozen) sampler.freeze_latent(options.frozen->y, options.frozen->s2);
  sampler.initialize(options.init, rng);

  PosteriorDraws draws;
  draws.engine = Engine::neuronized;
  draws.seed = seed;
  draws.n_burnin = options.n_burnin;
  draws.n_samples = options.n_samples;
  draws.z_draws.resize(options.n_samples, design.r());
  if (options.store_beta) draws.beta_draws = Matrix(options.n_samples, design.p());

  const long total = options.n_burnin + options.n_samples;
  for (long it = 0; it < total; ++it) {
    try {
      sampler.sweep(rng);
    } catch (const Error& err) {
      throw SamplerError(std::string("neuronized sweep ") + std::to_string(it) + ": " + err.what(),
                         it);
    }
    if (options.refresh_every > 0 && (it + 1) % options.refresh_every == 0) {
      sampler.refresh_residual();
    }
    if (it >= options.n_burnin) {
      long row = it - options.n_burnin;
      draws.z_draws.row(row) = sampler.z().transpose();
      if (draws.beta_draws) draws.beta_draws->row(row) = sampler.beta().transpose();
    }
  }
  draws.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

PosteriorDraws run_engine(Engine engine, const GroupedDesign& design, const Binary& e,
                          const Hyperparams& hyper, const RunOptions& options, std::uint64_t seed) {
  return engine == Engine::gibbs ? run_gibbs(design, e, hyper, options, seed)
                                 : run_neuronized(design, e, hyper, options, seed);
}

}  // namespace gss
