#pragma once

#include "gss/core.hpp"

#include <map>
#include <string>

namespace gss {

// Fraction of stored draws with z_j = 1. Throws UsageError on empty draws.
Vector inclusion_probabilities(const PosteriorDraws& draws);

// { j : inclusion_j > 0.5 }; exactly 0.5 is excluded.
GroupSet select_median_probability_model(const Vector& inclusion);

// Visit counts keyed by z pattern ("0110...").
std::map<std::string, long> model_counts(const PosteriorDraws& draws);

// Most frequent z pattern. Ties go to the smaller model, then to the
// lexicographically smaller index list.
GroupSet select_highest_frequency_model(const PosteriorDraws& draws);

struct RefitResult {
  Vector beta;  // length p, zero off the selected columns
  bool converged = false;
  bool separated = false;  // ridge-stabilized fallback was used
  int iterations = 0;
  double max_abs_score = 0.0;
};

struct RefitOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double separation_norm = 1e3;
  double ridge = 1e-4;
};

// Intercept-free logistic MLE on the union of the selected groups' columns by
// Newton / IRLS with step halving. Falls back to a ridge-penalized fit when
// the coefficients diverge (separation) or the Hessian is singular.
RefitResult refit_glm(const GroupedDesign& design, const Binary& e, const GroupSet& selected,
                      const RefitOptions& options = {});

enum class MspeScale { probability, linear };
std::string to_string(MspeScale scale);
MspeScale mspe_scale_from_string(const std::string& name);

struct Confusion {
  long tp = 0, tn = 0, fp = 0, fn = 0;
};

Confusion group_confusion(const GroupSet& selected, const GroupSet& truth, int r);
double matthews_correlation(const Confusion& c);

Vector predict_probabilities(const Matrix& x, const Vector& beta);

// Mean of (sigmoid(x'b) - e)^2 (probability scale) or (x'b - e)^2 (linear).
double prediction_error(const Vector& beta, const Matrix& test_x, const Binary& e_test,
                        MspeScale scale = MspeScale::probability);

// Group-level sensitivity/specificity/MCC/#errors plus the test-set MSPE.
// Ratios with a zero denominator are reported as 0.
MetricSet compute_metrics(const GroupSet& selected, const GroupSet& truth, int r,
                          const Vector& refit_beta, const Matrix& test_x, const Binary& e_test,
                          MspeScale scale = MspeScale::probability);

struct RocCurve {
  Vector thresholds;  // descending; the first is +inf
  Vector fpr;
  Vector tpr;
  double auc = 0.0;
};

RocCurve roc_from_scores(const Vector& scores, const Binary& labels);
RocCurve roc_curve(const Vector& refit_beta, const Matrix& test_x, const Binary& e_test);

// Inclusion probabilities, both point selections, visit counts and the
// refit on the median probability model.
SelectionReport summarize_draws(const PosteriorDraws& draws, const GroupedDesign& design,
                                const Binary& e, const RefitOptions& refit = {});

}  // namespace gss
