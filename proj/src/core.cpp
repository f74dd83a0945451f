#include "gss/core.hpp"

#include "gss/distributions.hpp"
#include "gss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gss {

void check_partition(const Partition& groups, Index p) {
  if (groups.empty()) throw StructuralError("group partition is empty");
  std::vector<int> owner(static_cast<std::size_t>(p), -1);
  Index total = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].empty()) {
      throw StructuralError("group " + std::to_string(j + 1) + " is empty");
    }
    for (Index c : groups[j]) {
      if (c < 0 || c >= p) {
        throw StructuralError("group " + std::to_string(j + 1) + " references column " +
                              std::to_string(c + 1) + " outside 1.." + std::to_string(p));
      }
      if (owner[c] >= 0) {
        throw StructuralError("column " + std::to_string(c + 1) + " appears in groups " +
                              std::to_string(owner[c] + 1) + " and " + std::to_string(j + 1));
      }
      owner[c] = static_cast<int>(j);
      ++total;
    }
  }
  if (total != p) {
    auto missing = std::find(owner.begin(), owner.end(), -1) - owner.begin();
    throw StructuralError("column " + std::to_string(missing + 1) + " is not in any group");
  }
}

GroupedDesign::GroupedDesign(Matrix x, Partition groups, Vector means, Vector sds,
                             bool standardized)
    : x_(std::move(x)),
      groups_(std::move(groups)),
      means_(std::move(means)),
      sds_(std::move(sds)),
      standardized_(standardized) {
  group_of_.assign(static_cast<std::size_t>(x_.cols()), -1);
  blocks_.reserve(groups_.size());
  for (std::size_t j = 0; j < groups_.size(); ++j) {
    Matrix b(x_.rows(), static_cast<Index>(groups_[j].size()));
    for (std::size_t k = 0; k < groups_[j].size(); ++k) {
      b.col(static_cast<Index>(k)) = x_.col(groups_[j][k]);
      group_of_[groups_[j][k]] = static_cast<int>(j);
    }
    blocks_.push_back(std::move(b));
  }
}

GroupedDesign GroupedDesign::standardize(const Matrix& raw, const Partition& groups) {
  const Index n = raw.rows();
  const Index p = raw.cols();
  if (n < 2) throw UsageError("standardization needs at least 2 rows");
  if (!raw.allFinite()) throw UsageError("design matrix has non-finite entries");
  check_partition(groups, p);

  Vector means = raw.colwise().mean().transpose();
  Vector sds(p);
  Matrix x = raw;
  for (Index c = 0; c < p; ++c) {
    x.col(c).array() -= means(c);
    double ss = x.col(c).squaredNorm();
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // relative test so that large-offset constant columns are caught too
    if (!(sd > 1e-12 * std::max(1.0, std::abs(means(c))))) {
      throw DegenerateColumnError("column " + std::to_string(c + 1) + " has zero variance", c);
    }
    sds(c) = sd;
    x.col(c) /= sd;
  }
  return GroupedDesign(std::move(x), groups, std::move(means), std::move(sds), true);
}

GroupedDesign GroupedDesign::unscaled(const Matrix& x, const Partition& groups) {
  if (!x.allFinite()) throw UsageError("design matrix has non-finite entries");
  check_partition(groups, x.cols());
  return GroupedDesign(x, groups, Vector::Zero(x.cols()), Vector::Ones(x.cols()), false);
}

Matrix GroupedDesign::transform(const Matrix& raw) const {
  if (raw.cols() != p()) {
    throw ConsistencyError("expected " + std::to_string(p()) + " columns, got " +
                           std::to_string(raw.cols()));
  }
  Matrix out = raw;
  out.rowwise() -= means_.transpose();
  out.array().rowwise() /= sds_.transpose().array();
  return out;
}

Vector GroupedDesign::gather(const Vector& beta, int j) const {
  const auto& g = groups_[j];
  Vector out(static_cast<Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) out(static_cast<Index>(k)) = beta(g[k]);
  return out;
}

void GroupedDesign::scatter(Vector& beta, int j, const Vector& values) const {
  const auto& g = groups_[j];
  for (std::size_t k = 0; k < g.size(); ++k) beta(g[k]) = values(static_cast<Index>(k));
}

std::vector<Index> GroupedDesign::columns_of(const GroupSet& model) const {
  std::vector<Index> cols;
  for (int j : model) cols.insert(cols.end(), groups_[j].begin(), groups_[j].end());
  return cols;
}

GroupedDesign validate_design(const Matrix& raw, const Partition& groups) {
  return GroupedDesign::standardize(raw, groups);
}

double t_scale_for(double nu) {
  return std::numbers::pi * std::numbers::pi * (nu - 2.0) / (3.0 * nu);
}

Hyperparams Hyperparams::make(double tau2, double q, double nu,
                              std::optional<int> max_model_groups) {
  if (!(tau2 > 0.0)) throw UsageError("tau2 must be positive");
  if (!(q > 0.0 && q < 1.0)) throw UsageError("q must lie in (0, 1)");
  if (!(nu > 2.0)) throw UsageError("nu must exceed 2");
  if (max_model_groups && *max_model_groups < 1) {
    throw UsageError("max_model_groups must be positive");
  }
  Hyperparams h;
  h.tau2 = tau2;
  h.q = q;
  h.nu = nu;
  h.sigma02 = t_scale_for(nu);
  h.alpha0 = normal_quantile(1.0 - q);
  h.max_model_groups = max_model_groups;
  return h;
}

double Hyperparams::log_prior_odds() const { return std::log(q) - std::log1p(-q); }

Hyperparams default_hyperparams(Index n, int r, double delta) {
  if (n < 1) throw UsageError("n must be at least 1");
  if (r < 2) throw UsageError("r must be at least 2");
  double tau2 = std::max(1.0, 0.01 * std::pow(static_cast<double>(r), 2.0 + 2.0 * delta) /
                                  static_cast<double>(n));
  return Hyperparams::make(tau2, 1.0 / r);
}

std::string to_string(Engine engine) {
  return engine == Engine::gibbs ? "gibbs" : "neuronized";
}

Engine engine_from_string(const std::string& name) {
  if (name == "gibbs") return Engine::gibbs;
  if (name == "neuronized") return Engine::neuronized;
  throw UsageError("unknown engine '" + name + "' (expected gibbs or neuronized)");
}

std::string pattern_key(const Eigen::Ref<const Binary>& z) {
  std::string key(static_cast<std::size_t>(z.size()), '0');
  for (Index j = 0; j < z.size(); ++j) {
    if (z(j)) key[static_cast<std::size_t>(j)] = '1';
  }
  return key;
}

GroupSet support_of(const Eigen::Ref<const Binary>& z) {
  GroupSet s;
  for (Index j = 0; j < z.size(); ++j) {
    if (z(j)) s.push_back(static_cast<int>(j));
  }
  return s;
}

Binary indicator_of(const GroupSet& model, int r) {
  Binary z = Binary::Zero(r);
  for (int j : model) z(j) = 1;
  return z;
}

}  // namespace gss
