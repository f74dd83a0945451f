#include "gss/inference.hpp"

#include "gss/distributions.hpp"
#include "gss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gss {

Vector inclusion_probabilities(const PosteriorDraws& draws) {
  if (draws.z_draws.rows() == 0) throw UsageError("inclusion_probabilities: no stored draws");
  return draws.z_draws.cast<double>().colwise().mean().transpose();
}

GroupSet select_median_probability_model(const Vector& inclusion) {
  GroupSet s;
  for (Index j = 0; j < inclusion.size(); ++j) {
    double v = inclusion(j);
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("inclusion probability outside [0, 1]");
    if (v > 0.5) s.push_back(static_cast<int>(j));
  }
  return s;
}

std::map<std::string, long> model_counts(const PosteriorDraws& draws) {
  std::map<std::string, long> counts;
  for (Index i = 0; i < draws.z_draws.rows(); ++i) {
    Binary row = draws.z_draws.row(i).transpose();
    ++counts[pattern_key(row)];
  }
  return counts;
}

namespace {

GroupSet model_from_key(const std::string& key) {
  GroupSet s;
  for (std::size_t j = 0; j < key.size(); ++j) {
    if (key[j] == '1') s.push_back(static_cast<int>(j));
  }
  return s;
}

bool better_tie(const GroupSet& a, const GroupSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

GroupSet select_highest_frequency_model(const PosteriorDraws& draws) {
  if (draws.z_draws.rows() == 0) throw UsageError("select_highest_frequency_model: no draws");
  long best_count = -1;
  GroupSet best;
  for (const auto& [key, count] : model_counts(draws)) {
    GroupSet m = model_from_key(key);
    if (count > best_count || (count == best_count && better_tie(m, best))) {
      best_count = count;
      best = std::move(m);
    }
  }
  return best;
}

namespace {

double penalized_loglik(const Matrix& x, const Binary& e, const Vector& beta, double ridge) {
  Vector eta = x * beta;
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) ll += (e(i) ? eta(i) : 0.0) - log1p_exp(eta(i));
  return ll - 0.5 * ridge * beta.squaredNorm();
}

struct NewtonOutcome {
  Vector beta;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double max_abs_score = 0.0;
};

NewtonOutcome newton_logistic(const Matrix& x, const Binary& e, double ridge, int max_iter,
                              double tol, double divergence_norm) {
  const Index k = x.cols();
  NewtonOutcome out;
  out.beta = Vector::Zero(k);
  Vector ed = e.cast<double>();
  double ll = penalized_loglik(x, e, out.beta, ridge);
  for (int it = 0; it < max_iter; ++it) {
    Vector eta = x * out.beta;
    Vector mu(eta.size()), wt(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
      mu(i) = sigmoid(eta(i));
      wt(i) = mu(i) * (1.0 - mu(i));
    }
    Vector grad = x.transpose() * (ed - mu) - ridge * out.beta;
    out.max_abs_score = grad.cwiseAbs().maxCoeff();
    out.iterations = it;
    if (out.max_abs_score < tol) {
      out.converged = true;
      return out;
    }
    Matrix hess = x.transpose() * (x.array().colwise() * wt.array()).matrix();
    hess.diagonal().array() += ridge;
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12).all()) {
      out.diverged = true;
      return out;
    }
    Vector step = ldlt.solve(grad);
    double t = 1.0;
    Vector trial = out.beta + step;
    double trial_ll = penalized_loglik(x, e, trial, ridge);
    // Near the optimum the log-likelihood change is at roundoff level.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    while (trial_ll < ll - slack && t > 1e-10) {
      t *= 0.5;
      trial = out.beta + t * step;
      trial_ll = penalized_loglik(x, e, trial, ridge);
    }
    out.beta = trial;
    ll = trial_ll;
    if (out.beta.norm() > divergence_norm) {
      out.diverged = true;
      return out;
    }
  }
  // one last score evaluation at the final iterate
  Vector eta = x * out.beta;
  Vector mu = eta.unaryExpr([](double v) { return sigmoid(v); });
  Vector grad = x.transpose() * (ed - mu) - ridge * out.beta;
  out.max_abs_score = grad.cwiseAbs().maxCoeff();
  out.converged = out.max_abs_score < tol;
  out.iterations = max_iter;
  return out;
}

}  // namespace

RefitResult refit_glm(const GroupedDesign& design, const Binary& e, const GroupSet& selected,
                      const RefitOptions& options) {
  if (e.size() != design.n()) throw ConsistencyError("refit_glm: response length mismatch");
  RefitResult result;
  result.beta = Vector::Zero(design.p());
  for (int j : selected) {
    if (j < 0 || j >= design.r()) throw UsageError("refit_glm: group index out of range");
  }
  if (selected.empty()) {
    result.converged = true;
    return result;
  }
  std::vector<Index> cols = design.columns_of(selected);
  Matrix xs(design.n(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) xs.col(static_cast<Index>(c)) = design.x().col(cols[c]);

  NewtonOutcome fit = newton_logistic(xs, e, 0.0, options.max_iterations, options.tolerance,
                                      options.separation_norm);
  if (fit.diverged || !fit.converged) {
    // Separation (or a rank-deficient support): ridge-stabilized estimate.
    fit = newton_logistic(xs, e, options.ridge, 2 * options.max_iterations, options.tolerance,
                          std::numeric_limits<double>::infinity());
    result.separated = true;
  }
  for (std::size_t c = 0; c < cols.size(); ++c) result.beta(cols[c]) = fit.beta(static_cast<Index>(c));
  result.converged = fit.converged;
  result.iterations = fit.iterations;
  result.max_abs_score = fit.max_abs_score;
  return result;
}

std::string to_string(MspeScale scale) {
  return scale == MspeScale::probability ? "probability" : "linear";
}

MspeScale mspe_scale_from_string(const std::string& name) {
  if (name == "probability") return MspeScale::probability;
  if (name == "linear") return MspeScale::linear;
  throw UsageError("unknown mspe scale '" + name + "' (expected probability or linear)");
}

Confusion group_confusion(const GroupSet& selected, const GroupSet& truth, int r) {
  if (r <= 0) throw UsageError("group_confusion: r must be positive");
  std::vector<char> sel(static_cast<std::size_t>(r), 0), tru(static_cast<std::size_t>(r), 0);
  for (int j : selected) {
    if (j < 0 || j >= r) throw UsageError("selected group index out of range");
    sel[static_cast<std::size_t>(j)] = 1;
  }
  for (int j : truth) {
    if (j < 0 || j >= r) throw UsageError("true group index out of range");
    tru[static_cast<std::size_t>(j)] = 1;
  }
  Confusion c;
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (sel[j] && tru[j]) ++c.tp;
    else if (sel[j]) ++c.fp;
    else if (tru[j]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double matthews_correlation(const Confusion& c) {
  double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

Vector predict_probabilities(const Matrix& x, const Vector& beta) {
  if (x.cols() != beta.size()) throw ConsistencyError("predict: coefficient length mismatch");
  Vector eta = x * beta;
  return eta.unaryExpr([](double v) { return sigmoid(v); });
}

double prediction_error(const Vector& beta, const Matrix& test_x, const Binary& e_test,
                        MspeScale scale) {
  if (test_x.rows() == 0) throw UsageError("prediction_error: empty test set");
  if (test_x.rows() != e_test.size()) throw ConsistencyError("test set size mismatch");
  Vector pred = scale == MspeScale::probability ? predict_probabilities(test_x, beta)
                                                : Vector(test_x * beta);
  return (pred - e_test.cast<double>()).squaredNorm() / static_cast<double>(e_test.size());
}

MetricSet compute_metrics(const GroupSet& selected, const GroupSet& truth, int r,
                          const Vector& refit_beta, const Matrix& test_x, const Binary& e_test,
                          MspeScale scale) {
  Confusion c = group_confusion(selected, truth, r);
  MetricSet m;
  m.tp = c.tp;
  m.tn = c.tn;
  m.fp = c.fp;
  m.fn = c.fn;
  m.sensitivity = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.specificity = c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
  m.mcc = matthews_correlation(c);
  m.n_errors = c.fp + c.fn;
  m.mspe = prediction_error(refit_beta, test_x, e_test, scale);
  return m;
}

RocCurve roc_from_scores(const Vector& scores, const Binary& labels) {
  if (scores.size() != labels.size()) throw ConsistencyError("roc: score/label length mismatch");
  const long pos = labels.sum();
  const long neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw UsageError("roc: test set must contain both classes");

  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });

  std::vector<double> th{std::numeric_limits<double>::infinity()}, fpr{0.0}, tpr{0.0};
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double s = scores(order[i]);
    while (i < order.size() && scores(order[i]) == s) {
      if (labels(order[i])) ++tp;
      else ++fp;
      ++i;
    }
    th.push_back(s);
    fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
  }
  RocCurve roc;
  roc.thresholds = Eigen::Map<Vector>(th.data(), static_cast<Index>(th.size()));
  roc.fpr = Eigen::Map<Vector>(fpr.data(), static_cast<Index>(fpr.size()));
  roc.tpr = Eigen::Map<Vector>(tpr.data(), static_cast<Index>(tpr.size()));
  double auc = 0.0;
  for (std::size_t k = 1; k < fpr.size(); ++k) auc += (fpr[k] - fpr[k - 1]) * 0.5 * (tpr[k] + tpr[k - 1]);
  roc.auc = auc;
  return roc;
}

RocCurve roc_curve(const Vector& refit_beta, const Matrix& test_x, const Binary& e_test) {
  return roc_from_scores(predict_probabilities(test_x, refit_beta), e_test);
}

SelectionReport summarize_draws(const PosteriorDraws& draws, const GroupedDesign& design,
                                const Binary& e, const RefitOptions& refit) {
  SelectionReport report;
  report.inclusion_prob = inclusion_probabilities(draws);
  report.selected = select_median_probability_model(report.inclusion_prob);
  report.highest_frequency = select_highest_frequency_model(draws);
  report.model_counts = model_counts(draws);
  RefitResult fit = refit_glm(design, e, report.selected, refit);
  report.refit_beta = std::move(fit.beta);
  report.refit_separated = fit.separated;
  return report;
}

}  // namespace gss
