#include "gss/oracle.hpp"

#include "gss/distributions.hpp"
#include "gss/errors.hpp"
#include "gss/neuronized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gss {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Matrix columns(const GroupedDesign& design, const GroupSet& model) {
  std::vector<Index> cols = design.columns_of(model);
  Matrix xk(design.n(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) xk.col(static_cast<Index>(c)) = design.x().col(cols[c]);
  return xk;
}

}  // namespace

double EnumeratedPosterior::prob_of(const GroupSet& model) const {
  return probs(static_cast<Index>(model_bitmask(model)));
}

std::size_t model_bitmask(const GroupSet& model) {
  std::size_t m = 0;
  for (int j : model) m |= std::size_t{1} << j;
  return m;
}

double log_marginal_factored(const GroupedDesign& design, const Vector& y, const Vector& weights,
                             const GroupSet& model, double tau2) {
  const Index n = design.n();
  double logdet = -weights.array().log().sum();
  double quad = y.cwiseProduct(weights).dot(y);
  if (!model.empty()) {
    Matrix xk = columns(design, model);
    Matrix xw = xk.array().colwise() * weights.array();
    Matrix inner = xw.transpose() * xk;
    inner.diagonal().array() += 1.0 / tau2;
    Eigen::LLT<Matrix> llt(inner);
    if (llt.info() != Eigen::Success) throw IllConditionedError("log_marginal_factored", 0.0);
    Vector b = xw.transpose() * y;
    Vector v = llt.matrixL().solve(b);
    logdet += static_cast<double>(xk.cols()) * std::log(tau2) +
              2.0 * llt.matrixLLT().diagonal().array().log().sum();
    quad -= v.squaredNorm();
  }
  return -0.5 * (static_cast<double>(n) * kLog2Pi + logdet + quad);
}

double log_marginal_direct(const GroupedDesign& design, const Vector& y, const Vector& weights,
                           const GroupSet& model, double tau2) {
  const Index n = design.n();
  Matrix cov = Matrix(weights.cwiseInverse().asDiagonal());
  if (!model.empty()) {
    Matrix xk = columns(design, model);
    cov.noalias() += tau2 * xk * xk.transpose();
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw IllConditionedError("log_marginal_direct", 0.0);
  Vector v = llt.matrixL().solve(y);
  double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * kLog2Pi + logdet + v.squaredNorm());
}

EnumeratedPosterior enumerate_posterior(const GroupedDesign& design, const Vector& y,
                                        const Vector& weights, const Hyperparams& hyper) {
  const int r = design.r();
  if (r > kMaxEnumerationGroups) {
    throw SizeError("enumeration supports at most " + std::to_string(kMaxEnumerationGroups) +
                    " groups, got " + std::to_string(r));
  }
  if (y.size() != design.n() || weights.size() != design.n()) {
    throw ConsistencyError("enumerate_posterior: latent vectors must have length n");
  }
  if (!(weights.array() > 0.0).all()) throw UsageError("enumerate_posterior: weights must be positive");

  const std::size_t count = std::size_t{1} << r;
  EnumeratedPosterior post;
  post.r = r;
  post.models.resize(count);
  post.log_marginals.resize(static_cast<Index>(count));
  Vector log_post(static_cast<Index>(count));
  const double lq = std::log(hyper.q), l1q = std::log1p(-hyper.q);
  for (std::size_t m = 0; m < count; ++m) {
    GroupSet model;
    for (int j = 0; j < r; ++j) {
      if (m & (std::size_t{1} << j)) model.push_back(j);
    }
    const auto k = static_cast<Index>(m);
    post.log_marginals(k) = log_marginal_factored(design, y, weights, model, hyper.tau2);
    const double size = static_cast<double>(model.size());
    log_post(k) = post.log_marginals(k) + size * lq + (r - size) * l1q;
    if (hyper.max_model_groups && static_cast<int>(model.size()) > *hyper.max_model_groups) {
      log_post(k) = -std::numeric_limits<double>::infinity();
    }
    post.models[m] = std::move(model);
  }
  const double top = log_post.maxCoeff();
  post.probs = (log_post.array() - top).exp();
  post.probs /= post.probs.sum();
  return post;
}

OracleComparison compare_chain_to_oracle(Engine engine, const GroupedDesign& design,
                                         const Vector& y, const Vector& weights,
                                         const Hyperparams& hyper, long n_sweeps,
                                         std::uint64_t seed, const InitPolicy& init) {
  OracleComparison out;
  out.exact = enumerate_posterior(design, y, weights, hyper);
  out.n_sweeps = n_sweeps;
  const Index count = out.exact.probs.size();
  out.empirical = Vector::Zero(count);

  if (n_sweeps <= 0) {
    // Both engines draw the initial active set first from Rng(seed).
    Rng rng(seed);
    GroupSet start = choose_initial_groups(init, design.r(), rng);
    out.empirical(static_cast<Index>(model_bitmask(start))) = 1.0;
  } else {
    RunOptions options;
    options.n_burnin = 0;
    options.n_samples = n_sweeps;
    options.init = init;
    options.frozen = FrozenLatent{y, weights.cwiseInverse()};
    Binary e(design.n());
    for (Index i = 0; i < design.n(); ++i) e(i) = y(i) >= 0.0 ? 1 : 0;
    PosteriorDraws draws = run_engine(engine, design, e, hyper, options, seed);
    for (Index s = 0; s < draws.z_draws.rows(); ++s) {
      std::size_t m = 0;
      for (int j = 0; j < design.r(); ++j) {
        if (draws.z_draws(s, j)) m |= std::size_t{1} << j;
      }
      out.empirical(static_cast<Index>(m)) += 1.0;
    }
    out.empirical /= static_cast<double>(n_sweeps);
  }
  out.tv = 0.5 * (out.empirical - out.exact.probs).cwiseAbs().sum();
  return out;
}

PosteriorRatioTrace posterior_ratio_trace(const PosteriorDraws& draws, const GroupSet& truth) {
  if (draws.z_draws.rows() == 0) throw UsageError("posterior_ratio_trace: no draws");
  PosteriorRatioTrace trace;
  const double total = static_cast<double>(draws.z_draws.rows());
  std::map<std::string, long> counts;
  Binary t = indicator_of(truth, draws.r());
  long superset = 0;
  for (Index s = 0; s < draws.z_draws.rows(); ++s) {
    Binary row = draws.z_draws.row(s).transpose();
    ++counts[pattern_key(row)];
    if (row != t && ((row.array() - t.array()) >= 0).all()) ++superset;
  }
  const std::string tkey = pattern_key(t);
  auto it = counts.find(tkey);
  long tcount = it == counts.end() ? 0 : it->second;
  trace.true_model_visited = tcount > 0;
  trace.true_model_prob = static_cast<double>(tcount) / total;
  trace.superset_prob = static_cast<double>(superset) / total;
  for (const auto& [key, c] : counts) {
    if (key == tkey) continue;
    trace.ratios[key] = tcount > 0 ? static_cast<double>(c) / static_cast<double>(tcount)
                                   : std::numeric_limits<double>::infinity();
  }
  return trace;
}

double effective_dimension(Index n, int r, Index p, double d_prime) {
  double base = static_cast<double>(n) / std::log(static_cast<double>(r));
  return std::min(std::pow(base, 0.5 * (1.0 - d_prime)), static_cast<double>(p));
}

namespace {

double min_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

// Random model whose total column count stays within `budget`, built from a
// random group order with a random number of attempted groups.
GroupSet random_model(const GroupedDesign& design, double budget, int max_groups, Rng& rng) {
  const int r = design.r();
  std::vector<int> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), 0);
  int want = 1 + static_cast<int>(rng.uniform_index(std::max(1, max_groups)));
  GroupSet model;
  double used = 0.0;
  for (int i = 0; i < r && static_cast<int>(model.size()) < want; ++i) {
    int pick = i + static_cast<int>(rng.uniform_index(r - i));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick)]);
    int j = order[static_cast<std::size_t>(i)];
    double size = static_cast<double>(design.group_size(j));
    if (used + size <= budget) {
      model.push_back(j);
      used += size;
    }
  }
  std::sort(model.begin(), model.end());
  return model;
}

}  // namespace

ConditionReport condition_report(const SimDataset& data, const Hyperparams& hyper, double d,
                                 double d_prime, int n_probe, std::uint64_t seed, double delta) {
  if (!(d >= 0.0 && d < 0.5 * (1.0 + d) && 0.5 * (1.0 + d) <= d_prime && d_prime <= 1.0)) {
    throw UsageError("condition_report: requires 0 <= d < (1+d)/2 <= d' <= 1");
  }
  if (n_probe < 1) throw UsageError("condition_report: n_probe must be positive");
  const GroupedDesign& design = data.design;
  const Index n = design.n();
  const int r = design.r();
  const double nd = static_cast<double>(n);

  ConditionReport rep;
  rep.d = d;
  rep.d_prime = d_prime;
  rep.n_probe = n_probe;
  rep.m_n = effective_dimension(n, r, design.p(), d_prime);
  for (int j : data.true_model) rep.true_size += design.group_size(j);
  rep.true_size_within_mn = static_cast<double>(rep.true_size) <= rep.m_n;

  Rng rng(seed);
  const double budget = rep.m_n + static_cast<double>(rep.true_size);

  // lambda: min eigenvalue of n^-1 X_k' Sigma(beta0_k) X_k over sampled k
  auto restricted_eigen = [&](const GroupSet& model) {
    std::vector<Index> cols = design.columns_of(model);
    Matrix xk(n, static_cast<Index>(cols.size()));
    Vector b(static_cast<Index>(cols.size()));
    Matrix raw(n, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      xk.col(static_cast<Index>(c)) = design.x().col(cols[c]);
      raw.col(static_cast<Index>(c)) = data.x_raw.col(cols[c]);
      b(static_cast<Index>(c)) = data.beta0(cols[c]);
    }
    Vector eta = raw * b;
    Vector wt(n);
    for (Index i = 0; i < n; ++i) {
      double mu = sigmoid(eta(i));
      wt(i) = mu * (1.0 - mu);
    }
    Matrix h = xk.transpose() * (xk.array().colwise() * wt.array()).matrix() / nd;
    return min_eigen(h);
  };
  rep.lambda_hat = std::numeric_limits<double>::infinity();
  if (static_cast<double>(rep.true_size) <= budget && !data.true_model.empty()) {
    rep.lambda_hat = restricted_eigen(data.true_model);
  }
  for (int probe = 0; probe < n_probe; ++probe) {
    GroupSet model = random_model(design, budget, r, rng);
    if (model.empty()) continue;
    rep.lambda_hat = std::min(rep.lambda_hat, restricted_eigen(model));
  }

  // Lambda_{|t|}: max eigenvalue of n^-1 X_k' X_k over |k| <= |t| groups;
  // every singleton is included.
  const int zeta = std::max<int>(1, static_cast<int>(data.true_model.size()));
  auto gram_max = [&](const GroupSet& model) {
    Matrix xk = Matrix(design.n(), 0);
    std::vector<Index> cols = design.columns_of(model);
    xk.resize(n, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) xk.col(static_cast<Index>(c)) = design.x().col(cols[c]);
    return max_eigen(xk.transpose() * xk / nd);
  };
  rep.Lambda_hat = 0.0;
  for (int j = 0; j < r; ++j) rep.Lambda_hat = std::max(rep.Lambda_hat, gram_max({j}));
  if (!data.true_model.empty()) rep.Lambda_hat = std::max(rep.Lambda_hat, gram_max(data.true_model));
  for (int probe = 0; probe < n_probe; ++probe) {
    GroupSet model = random_model(design, std::numeric_limits<double>::infinity(), zeta, rng);
    if (!model.empty()) rep.Lambda_hat = std::max(rep.Lambda_hat, gram_max(model));
  }

  // beta-min: min_{j in t} |beta0_j|^2 >= c0 |G_t| Lambda_{|t|} log r / n
  rep.beta_min_lhs = data.true_model.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (int j : data.true_model) {
    double s = 0.0;
    for (Index c : design.group(j)) s += data.beta0(c) * data.beta0(c);
    rep.beta_min_lhs = std::min(rep.beta_min_lhs, s);
  }
  rep.beta_min_rhs = static_cast<double>(rep.true_size) * rep.Lambda_hat *
                     std::log(static_cast<double>(r)) / nd;
  rep.c0_ratio = rep.beta_min_rhs > 0.0 ? rep.beta_min_lhs / rep.beta_min_rhs : 0.0;

  // order-of-magnitude agreement with the tau2 and q rates
  double tau2_rate = std::max(1.0, std::pow(static_cast<double>(r), 2.0 + 2.0 * delta) / nd);
  double tau2_ratio = hyper.tau2 / tau2_rate;
  rep.tau2_rule_ok = tau2_ratio >= 1e-3 && tau2_ratio <= 1e3;
  double q_ratio = hyper.q * r;
  rep.q_rule_ok = q_ratio >= 0.1 && q_ratio <= 10.0;
  return rep;
}

}  // namespace gss
