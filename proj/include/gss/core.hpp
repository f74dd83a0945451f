#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gss {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// 0/1 vectors (responses, group indicators) and stacked indicator draws.
using Binary = Eigen::VectorXi;
using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Column indices of each group, 0-based.
using Partition = std::vector<std::vector<Index>>;
// A model: sorted 0-based group indices.
using GroupSet = std::vector<int>;

// Design matrix together with its column partition into groups. Columns are
// standardized (mean 0, sample variance 1) unless built with `unscaled`.
class GroupedDesign {
 public:
  // Standardizes `raw` column-wise: population mean, sample (n-1) sd.
  static GroupedDesign standardize(const Matrix& raw, const Partition& groups);
  // Uses `x` as-is. For oracles and hand-built fixtures.
  static GroupedDesign unscaled(const Matrix& x, const Partition& groups);

  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  int r() const { return static_cast<int>(groups_.size()); }

  const Matrix& x() const { return x_; }
  const Partition& groups() const { return groups_; }
  const std::vector<Index>& group(int j) const { return groups_[j]; }
  Index group_size(int j) const { return static_cast<Index>(groups_[j].size()); }
  // Dense n x |G_j| copy of the group's columns.
  const Matrix& block(int j) const { return blocks_[j]; }
  int group_of(Index column) const { return group_of_[column]; }
  bool is_standardized() const { return standardized_; }

  const Vector& column_means() const { return means_; }
  const Vector& column_sds() const { return sds_; }
  // Applies this design's training moments to new rows (test covariates).
  Matrix transform(const Matrix& raw) const;

  // Gathers the coordinates of `beta` that belong to group j.
  Vector gather(const Vector& beta, int j) const;
  void scatter(Vector& beta, int j, const Vector& values) const;
  // Columns covered by the union of the given groups, in group order.
  std::vector<Index> columns_of(const GroupSet& model) const;

 private:
  GroupedDesign(Matrix x, Partition groups, Vector means, Vector sds, bool standardized);

  Matrix x_;
  Partition groups_;
  std::vector<Matrix> blocks_;
  std::vector<int> group_of_;
  Vector means_;
  Vector sds_;
  bool standardized_ = false;
};

// Throws StructuralError unless `groups` partitions 0..p-1.
void check_partition(const Partition& groups, Index p);

// Validates and standardizes. Throws StructuralError / DegenerateColumnError.
GroupedDesign validate_design(const Matrix& raw, const Partition& groups);

struct Hyperparams {
  double tau2 = 1.0;
  double q = 0.5;
  double nu = 7.3;
  double sigma02 = 0.0;  // t scale, pi^2 (nu - 2) / (3 nu)
  double alpha0 = 0.0;   // Phi^{-1}(1 - q)
  std::optional<int> max_model_groups;

  // Fills sigma02 and alpha0 from nu and q.
  static Hyperparams make(double tau2, double q, double nu = 7.3,
                          std::optional<int> max_model_groups = std::nullopt);
  double log_prior_odds() const;
  // Prior mean of the mixture scale s_i^2.
  double prior_scale_mean() const { return sigma02 * nu / (nu - 2.0); }
};

double t_scale_for(double nu);

// tau2 = max{1, 0.01 n^-1 r^(2 + 2 delta)}, q = 1/r, nu = 7.3.
Hyperparams default_hyperparams(Index n, int r, double delta = 0.01);

enum class Engine { gibbs, neuronized };
std::string to_string(Engine engine);
Engine engine_from_string(const std::string& name);

// Full latent state of one chain. `alpha` and `w` are used by the
// neuronized engine only.
struct ChainState {
  Vector beta;
  Binary z;
  Vector y;
  Vector s2;
  Vector alpha;
  Vector w;
};

struct PosteriorDraws {
  BinaryMatrix z_draws;
  std::optional<Matrix> beta_draws;
  std::uint64_t seed = 0;
  long n_burnin = 0;
  long n_samples = 0;
  Engine engine = Engine::gibbs;
  double elapsed_seconds = 0.0;

  int r() const { return static_cast<int>(z_draws.cols()); }
};

struct MetricSet {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;
  double mspe = 0.0;
  long n_errors = 0;
  long tp = 0, tn = 0, fp = 0, fn = 0;
};

struct SelectionReport {
  Vector inclusion_prob;
  GroupSet selected;
  GroupSet highest_frequency;
  std::map<std::string, long> model_counts;  // key: z pattern as "0101..."
  Vector refit_beta;
  bool refit_separated = false;
  std::optional<MetricSet> metrics;
};

// Renders a 0/1 row as a "0110" string key.
std::string pattern_key(const Eigen::Ref<const Binary>& z);
GroupSet support_of(const Eigen::Ref<const Binary>& z);
Binary indicator_of(const GroupSet& model, int r);

}  // namespace gss
