#include "gss/core.hpp"
#include "gss/distributions.hpp"
#include "gss/errors.hpp"
#include "gss/inference.hpp"
#include "gss/neuronized.hpp"
#include "gss/oracle.hpp"
#include "gss/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gss;

namespace {

Partition to_partition(const std::vector<std::vector<Index>>& groups) { return groups; }

py::dict dataset_dict(const SimDataset& d) {
  py::dict out;
  out["x"] = d.x_raw;
  out["e"] = d.e;
  out["groups"] = d.design.groups();
  out["true_model"] = d.true_model;
  out["beta0"] = d.beta0;
  out["x_test"] = d.x_test_raw;
  out["e_test"] = d.e_test;
  out["seed"] = d.seed;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Group spike-and-slab selection for logistic regression";

  static py::exception<Error> base(m, "GssError");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init([](double tau2, double q, double nu, std::optional<int> cap) {
             return Hyperparams::make(tau2, q, nu, cap);
           }),
           py::arg("tau2"), py::arg("q"), py::arg("nu") = 7.3, py::arg("max_model_groups") = py::none())
      .def_readonly("tau2", &Hyperparams::tau2)
      .def_readonly("q", &Hyperparams::q)
      .def_readonly("nu", &Hyperparams::nu)
      .def_readonly("sigma02", &Hyperparams::sigma02)
      .def_readonly("alpha0", &Hyperparams::alpha0)
      .def_readonly("max_model_groups", &Hyperparams::max_model_groups);

  m.def("default_hyperparams", &default_hyperparams, py::arg("n"), py::arg("r"), py::arg("delta") = 0.01);
  m.def("t_scale_for", &t_scale_for, py::arg("nu"));

  m.def(
      "simulate",
      [](int design, int setting, const std::string& cov, std::uint64_t seed, Index n, int r, int active) {
        SimConfig c = design_config(design, setting_from_int(setting), covariance_from_string(cov), seed);
        if (n > 0) c.n = n;
        if (r > 0) c.r = r;
        if (active > 0) c.n_active = active;
        return dataset_dict(gen_dataset(c));
      },
      py::arg("design") = 1, py::arg("setting") = 4, py::arg("cov") = "isotropic", py::arg("seed") = 1,
      py::arg("n") = 0, py::arg("r") = 0, py::arg("active") = 0);

  m.def(
      "fit",
      [](const Matrix& x, const Binary& e, const std::vector<std::vector<Index>>& groups,
         const std::string& engine, long burnin, long samples, std::uint64_t seed,
         std::optional<Hyperparams> hyper, bool block_moves) {
        GroupedDesign design = validate_design(x, to_partition(groups));
        Hyperparams h = hyper ? *hyper : default_hyperparams(design.n(), design.r());
        RunOptions opt;
        opt.n_burnin = burnin;
        opt.n_samples = samples;
        opt.block_moves = block_moves;
        PosteriorDraws draws;
        {
          py::gil_scoped_release release;
          draws = run_engine(engine_from_string(engine), design, e, h, opt, seed);
        }
        SelectionReport rep = summarize_draws(draws, design, e);
        py::dict out;
        out["z"] = draws.z_draws;
        out["inclusion"] = rep.inclusion_prob;
        out["selected"] = rep.selected;
        out["highest_frequency"] = rep.highest_frequency;
        out["refit_beta"] = rep.refit_beta;
        out["separated"] = rep.refit_separated;
        out["column_means"] = design.column_means();
        out["column_sds"] = design.column_sds();
        out["elapsed_seconds"] = draws.elapsed_seconds;
        return out;
      },
      py::arg("x"), py::arg("e"), py::arg("groups"), py::arg("engine") = "gibbs", py::arg("burnin") = 2000,
      py::arg("samples") = 2000, py::arg("seed") = 1, py::arg("hyper") = py::none(),
      py::arg("block_moves") = true);

  m.def("select_median_probability_model", &select_median_probability_model, py::arg("inclusion"));

  m.def(
      "compute_metrics",
      [](const GroupSet& selected, const GroupSet& truth, int r, const Vector& beta, const Matrix& test_x,
         const Binary& e_test, const std::string& scale) {
        MetricSet s = compute_metrics(selected, truth, r, beta, test_x, e_test, mspe_scale_from_string(scale));
        py::dict out;
        out["sensitivity"] = s.sensitivity;
        out["specificity"] = s.specificity;
        out["mcc"] = s.mcc;
        out["mspe"] = s.mspe;
        out["n_errors"] = s.n_errors;
        return out;
      },
      py::arg("selected"), py::arg("truth"), py::arg("r"), py::arg("beta"), py::arg("test_x"),
      py::arg("e_test"), py::arg("scale") = "probability");

  m.def(
      "matthews_correlation",
      [](long tp, long tn, long fp, long fn) { return matthews_correlation(Confusion{tp, tn, fp, fn}); },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));

  m.def(
      "sample_truncated_normal",
      [](double mean, double sd, double lower, double upper, std::size_t count, std::uint64_t seed) {
        Rng rng(seed);
        Vector out(static_cast<Index>(count));
        for (Index i = 0; i < out.size(); ++i) out(i) = sample_truncated_normal(mean, sd, lower, upper, rng);
        return out;
      },
      py::arg("mean"), py::arg("sd"), py::arg("lower"), py::arg("upper"), py::arg("count"), py::arg("seed") = 1);

  m.def(
      "oracle_tv",
      [](const Matrix& x, const std::vector<std::vector<Index>>& groups, const Vector& y, const Vector& weights,
         const Hyperparams& hyper, const std::string& engine, long sweeps, std::uint64_t seed) {
        GroupedDesign design = GroupedDesign::unscaled(x, to_partition(groups));
        OracleComparison c;
        {
          py::gil_scoped_release release;
          c = compare_chain_to_oracle(engine_from_string(engine), design, y, weights, hyper, sweeps, seed);
        }
        py::dict out;
        out["tv"] = c.tv;
        out["exact"] = c.exact.probs;
        out["empirical"] = c.empirical;
        out["models"] = c.exact.models;
        return out;
      },
      py::arg("x"), py::arg("groups"), py::arg("y"), py::arg("weights"), py::arg("hyper"),
      py::arg("engine") = "gibbs", py::arg("sweeps") = 20000, py::arg("seed") = 1);
}
