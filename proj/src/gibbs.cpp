#include "gss/gibbs.hpp"

#include "gss/errors.hpp"

#include <chrono>
#include <cmath>

namespace gss {

Matrix GroupConditional::covariance() const {
  Index k = whitened.size();
  return factor.solve(Matrix::Identity(k, k));
}

GibbsSampler::GibbsSampler(const GroupedDesign& design, Binary e, Hyperparams hyper)
    : design_(design), e_(std::move(e)), hyper_(std::move(hyper)) {
  if (e_.size() != design_.n()) throw ConsistencyError("response length does not match design");
  state_.beta = Vector::Zero(design_.p());
  state_.z = Binary::Zero(design_.r());
  init_latent(state_.y, state_.s2, e_, hyper_);
  weights_ = state_.s2.cwiseInverse();
  residual_ = state_.y;
}

void GibbsSampler::initialize(const InitPolicy& init, Rng& rng) {
  GroupSet active = choose_initial_groups(init, design_.r(), rng);
  ChainState s;
  s.beta = Vector::Zero(design_.p());
  s.z = indicator_of(active, design_.r());
  for (int j : active) {
    design_.scatter(s.beta, j, init.coef_sd * rng.normal_vector(design_.group_size(j)));
  }
  if (frozen_) {
    s.y = state_.y;
    s.s2 = state_.s2;
  } else {
    init_latent(s.y, s.s2, e_, hyper_);
  }
  set_state(std::move(s));
}

void GibbsSampler::set_state(ChainState state) {
  if (state.beta.size() != design_.p() || state.z.size() != design_.r() ||
      state.y.size() != design_.n() || state.s2.size() != design_.n()) {
    throw ConsistencyError("chain state dimensions do not match the design");
  }
  state_ = std::move(state);
  weights_ = state_.s2.cwiseInverse();
  active_count_ = static_cast<int>(state_.z.sum());
  cached_.reset();
  refresh_residual();
}

void GibbsSampler::freeze_latent(Vector y, Vector s2) {
  if (y.size() != design_.n() || s2.size() != design_.n()) {
    throw ConsistencyError("frozen latent vectors must have length n");
  }
  state_.y = std::move(y);
  state_.s2 = std::move(s2);
  weights_ = state_.s2.cwiseInverse();
  frozen_ = true;
  cached_.reset();
  refresh_residual();
}

void GibbsSampler::refresh_residual() { residual_ = state_.y - design_.x() * state_.beta; }

double GibbsSampler::residual_drift() const {
  Vector exact = state_.y - design_.x() * state_.beta;
  double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  return (residual_ - exact).cwiseAbs().maxCoeff() / scale;
}

void GibbsSampler::step_latent_y(Rng& rng) {
  Vector eta = linear_predictor();
  draw_latent_y(state_.y, eta, state_.s2, e_, rng);
  residual_ = state_.y - eta;
  cached_.reset();
}

void GibbsSampler::step_scales(Rng& rng) {
  draw_scales(state_.s2, residual_, hyper_, rng);
  weights_ = state_.s2.cwiseInverse();
  cached_.reset();
}

GroupConditional collapsed_group_conditional(int j, const Matrix& xg, const Vector& weights,
                                              const Vector& partial_residual, const Hyperparams& hyper) {
  const Index k = xg.cols();
  Matrix xw = xg.array().colwise() * weights.array();
  Matrix precision = xw.transpose() * xg;
  precision.diagonal().array() += 1.0 / hyper.tau2;

  GroupConditional c;
  c.group = j;
  c.factor.compute(precision);
  if (c.factor.info() != Eigen::Success) {
    throw IllConditionedError("group " + std::to_string(j + 1) +
                                  ": posterior precision is not positive definite",
                              precision.diagonal().minCoeff());
  }
  c.whitened = c.factor.matrixL().solve(xw.transpose() * partial_residual);
  double half_logdet_precision = c.factor.matrixLLT().diagonal().array().log().sum();
  c.log_odds = hyper.log_prior_odds() - 0.5 * static_cast<double>(k) * std::log(hyper.tau2) -
               half_logdet_precision + 0.5 * c.whitened.squaredNorm();
  return c;
}

GroupConditional GibbsSampler::group_conditional(int j) const {
  const Matrix& xg = design_.block(j);
  Vector partial = residual_;
  if (state_.z(j)) partial.noalias() += xg * design_.gather(state_.beta, j);
  GroupConditional c = collapsed_group_conditional(j, xg, weights_, partial, hyper_);
  if (hyper_.max_model_groups && !state_.z(j) && active_count_ + 1 > *hyper_.max_model_groups) {
    c.capped = true;
  }
  return c;
}

int GibbsSampler::step_group_indicator(int j, Rng& rng) {
  GroupConditional c = group_conditional(j);
  int z = c.capped ? 0 : bernoulli_from_log_odds(c.log_odds, rng);
  active_count_ += z - state_.z(j);
  state_.z(j) = z;
  cached_ = std::move(c);
  return z;
}

void GibbsSampler::step_group_beta(int j, Rng& rng) {
  if (!cached_ || cached_->group != j) cached_ = group_conditional(j);
  const GroupConditional& c = *cached_;
  const Index k = design_.group_size(j);
  Vector old_beta = design_.gather(state_.beta, j);
  Vector new_beta = Vector::Zero(k);
  if (state_.z(j)) {
    Vector v = c.whitened + rng.normal_vector(k);
    new_beta = c.factor.matrixU().solve(v);
  }
  Vector delta = new_beta - old_beta;
  if (delta.squaredNorm() > 0.0) residual_.noalias() -= design_.block(j) * delta;
  design_.scatter(state_.beta, j, new_beta);
  cached_.reset();
}

void GibbsSampler::sweep(Rng& rng) {
  if (!frozen_) {
    step_latent_y(rng);
    step_scales(rng);
  }
  for (int j = 0; j < design_.r(); ++j) {
    step_group_indicator(j, rng);
    step_group_beta(j, rng);
  }
}

PosteriorDraws run_gibbs(const GroupedDesign& design, const Binary& e, const Hyperparams& hyper,
                         const RunOptions& options, std::uint64_t seed) {
  check_run_inputs(design, e, options);
  auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  GibbsSampler sampler(design, e, hyper);
  if (options.frozen) sampler.freeze_latent(options.frozen->y, options.frozen->s2);
  sampler.initialize(options.init, rng);

  PosteriorDraws draws;
  draws.engine = Engine::gibbs;
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
      throw SamplerError(std::string("gibbs sweep ") + std::to_string(it) + ": " + err.what(), it);
    }
    if (options.refresh_every > 0 && (it + 1) % options.refresh_every == 0) {
      sampler.refresh_residual();
    }
    if (it >= options.n_burnin) {
      long row = it - options.n_burnin;
      draws.z_draws.row(row) = sampler.state().z.transpose();
      if (draws.beta_draws) draws.beta_draws->row(row) = sampler.state().beta.transpose();
    }
  }
  draws.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

}  // namespace gss
