#include "gss/errors.hpp"
#include "gss/simulate.hpp"

#include "../support/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

using namespace gss;
using namespace gss::testing;

namespace {
Matrix correlation(const Matrix& x) {
  Matrix c = row_covariance(x);
  Vector s = c.diagonal().cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * c * s.asDiagonal();
}
}  // namespace

TEST_CASE("isotropic covariates are uncorrelated") {
  Rng rng(1);
  Matrix corr = correlation(gen_covariates(100000, 3, Covariance::isotropic, 0.5, rng));
  CHECK((corr - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("compound symmetry has equal off-diagonal correlation 0.5") {
  Rng rng(2);
  Matrix corr = correlation(gen_covariates(100000, 4, Covariance::compound_symmetry, 0.5, rng));
  for (Index a = 0; a < 4; ++a)
    for (Index b = a + 1; b < 4; ++b) CHECK(std::abs(corr(a, b) - 0.5) < 0.02);
}

TEST_CASE("AR(1) correlation decays geometrically") {
  Rng rng(3);
  Matrix x = gen_covariates(100000, 3, Covariance::ar1, 0.5, rng);
  Matrix corr = correlation(x);
  CHECK(std::abs(corr(0, 1) - 0.5) < 0.02);
  CHECK(std::abs(corr(0, 2) - 0.25) < 0.02);
  CHECK(std::abs(row_covariance(x)(2, 2) - 1.0) < 0.02);
}

TEST_CASE("logistic responses follow the linear predictor") {
  Rng rng(4);
  const Index n = 100000;
  Matrix x = Matrix::Ones(n, 1);
  auto freq = [&](double b) {
    Vector beta = Vector::Constant(1, b);
    return static_cast<double>(gen_response(x, beta, rng).sum()) / static_cast<double>(n);
  };
  CHECK(std::abs(freq(0.0) - 0.5) < 0.005);
  CHECK(std::abs(freq(std::log(9.0)) - 0.9) < 0.005);
  CHECK(freq(-50.0) == 0.0);
  CHECK_THROWS_AS(gen_response(x, Vector::Zero(2), rng), UsageError);
}

TEST_CASE("Design 1 dataset: sizes, truth and signal") {
  SimDataset d = gen_dataset(design_config(1, SignalSetting::constant_low, Covariance::isotropic, 5));
  CHECK(d.design.r() == 50);
  CHECK(d.design.p() >= 200);
  CHECK(d.design.p() <= 300);
  CHECK(d.true_model == GroupSet{0, 1, 2});
  CHECK(d.e.size() == 100);
  CHECK(d.test_x.rows() == 100);
  CHECK(d.e_test.size() == 100);
  for (Index c = 0; c < d.beta0.size(); ++c) {
    bool active = d.design.group_of(c) < 3;
    if (active) CHECK(d.beta0(c) == 1.5);
    else CHECK(d.beta0(c) == 0.0);
  }
  CHECK(d.e.sum() > 0);
  CHECK(d.e.sum() < d.e.size());
}

TEST_CASE("datasets are deterministic in the seed") {
  SimConfig c = design_config(2, SignalSetting::uniform_high, Covariance::ar1, 11);
  SimDataset a = gen_dataset(c), b = gen_dataset(c);
  CHECK(a.x_raw == b.x_raw);
  CHECK(a.e == b.e);
  CHECK(a.beta0 == b.beta0);
  CHECK(a.design.groups() == b.design.groups());
  CHECK(a.x_test_raw == b.x_test_raw);
  CHECK(a.e_test == b.e_test);
  c.seed = 12;
  CHECK(gen_dataset(c).x_raw != a.x_raw);
}

TEST_CASE("group sizes are uniform over 4, 5 and 6") {
  SimConfig c;
  c.r = 50;
  Rng rng(6);
  std::map<std::size_t, long> hist;
  long total = 0;
  for (int k = 0; k < 10000; ++k) {
    for (const auto& g : gen_groups(c, rng)) {
      ++hist[g.size()];
      ++total;
    }
  }
  CHECK(hist.size() == 3);
  for (std::size_t s : {4u, 5u, 6u}) CHECK(std::abs(static_cast<double>(hist[s]) / total - 1.0 / 3.0) < 0.02);
}

TEST_CASE("beta0 support is exactly the union of the active groups") {
  for (int setting = 1; setting <= 4; ++setting) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SimDataset d = gen_dataset(design_config(2, setting_from_int(setting), Covariance::isotropic, seed));
      REQUIRE(d.true_model.size() == 6);
      std::set<Index> active;
      for (int j : d.true_model)
        for (Index c : d.design.group(j)) active.insert(c);
      for (Index c = 0; c < d.beta0.size(); ++c) {
        const double b = d.beta0(c);
        if (!active.count(c)) {
          REQUIRE(b == 0.0);
          continue;
        }
        switch (setting) {
          case 1: REQUIRE((b > 0.5 && b < 1.5)); break;
          case 2: REQUIRE(b == 1.5); break;
          case 3: REQUIRE((b > 1.5 && b < 3.0)); break;
          case 4: REQUIRE(b == 3.0); break;
        }
      }
    }
  }
}

TEST_CASE("Design 3 has 100 groups") {
  SimDataset d = gen_dataset(design_config(3, SignalSetting::uniform_high, Covariance::isotropic, 1));
  CHECK(d.design.r() == 100);
  CHECK(d.true_model.size() == 3);
}

TEST_CASE("test covariates use the training moments") {
  SimDataset d = gen_dataset(design_config(1, SignalSetting::constant_high, Covariance::isotropic, 8));
  CHECK((d.design.transform(d.x_test_raw) - d.test_x).cwiseAbs().maxCoeff() < 1e-12);
  Vector eta = d.x_test_raw * d.beta0;
  for (Index i = 0; i < eta.size(); ++i) CHECK(d.true_prob_test(i) == doctest::Approx(sigmoid(eta(i))));
}

TEST_CASE("a constant response triggers a regeneration") {
  SimConfig c;
  c.n = 2;
  c.r = 2;
  c.n_active = 0;
  bool retried = false;
  for (std::uint64_t seed = 1; seed <= 40 && !retried; ++seed) {
    c.seed = seed;
    SimDataset d = gen_dataset(c);
    REQUIRE(d.e.sum() == 1);
    retried = d.attempts > 1;
  }
  CHECK(retried);
}

TEST_CASE("invalid simulation settings are usage errors") {
  CHECK_THROWS_AS(design_config(4, SignalSetting::uniform_low, Covariance::isotropic, 1), UsageError);
  CHECK_THROWS_AS(setting_from_int(5), UsageError);
  CHECK_THROWS_AS(covariance_from_string("toeplitz"), UsageError);
  CHECK(covariance_from_string(to_string(Covariance::compound_symmetry)) == Covariance::compound_symmetry);
  SimConfig c;
  c.n_active = 60;
  CHECK_THROWS_AS(gen_dataset(c), UsageError);
}
