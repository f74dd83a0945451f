#include "gss/commands.hpp"

#include "gss/distributions.hpp"
#include "gss/errors.hpp"
#include "gss/gibbs.hpp"
#include "gss/io.hpp"
#include "gss/neuronized.hpp"
#include "gss/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace gss::cli {

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string rep_name(int rep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%04d", rep + 1);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

void check_choice(const std::string& value, std::initializer_list<const char*> allowed,
                  const char* option) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string msg = std::string("unknown value '") + value + "' for " + option + " (expected";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw UsageError(msg + ")");
}

Matrix apply_moments(const Matrix& raw, const Vector& means, const Vector& sds) {
  return (raw.rowwise() - means.transpose()).array().rowwise() / sds.transpose().array();
}

BinaryMatrix read_draws(const fs::path& dir) {
  if (fs::exists(dir / "draws.bin")) return io::read_draws_bin(dir / "draws.bin");
  if (fs::exists(dir / "draws.csv")) return io::read_draws_csv(dir / "draws.csv");
  throw ConsistencyError("no draws.bin or draws.csv in " + dir.string());
}

}  // namespace

json to_json(const SimulateConfig& c) {
  return json{{"command", "simulate"}, {"design", c.design}, {"setting", c.setting},
              {"cov", c.cov},          {"seed", c.seed},     {"n", c.n},
              {"r", c.r},              {"active", c.active}, {"n_test", c.n_test},
              {"rho", c.rho},          {"out", c.out.string()}};
}

json to_json(const FitConfig& c) {
  return json{{"command", "fit"},
              {"data", c.data.string()},
              {"out", c.out.string()},
              {"engine", c.engine},
              {"burnin", c.burnin},
              {"samples", c.samples},
              {"seed", c.seed},
              {"tau2", optional_json(c.tau2)},
              {"q", optional_json(c.q)},
              {"nu", c.nu},
              {"max_model_groups", optional_json(c.max_model_groups)},
              {"init_active", c.init_active},
              {"draws_format", c.draws_format},
              {"fast_threshold", optional_json(c.fast_threshold)},
              {"full_weight_system", c.full_weight_system},
              {"block_moves", c.block_moves}};
}

json to_json(const EvaluateConfig& c) {
  return json{{"command", "evaluate"}, {"fit", c.fit.string()}, {"data", c.data.string()},
              {"out", c.out.string()},  {"mode", c.mode},         {"mspe", c.mspe},
              {"cutoff", c.cutoff}};
}

json to_json(const BatchConfig& c) {
  return json{{"command", "batch"}, {"design", c.design},   {"setting", c.setting},
              {"cov", c.cov},       {"engine", c.engines}, {"reps", c.reps},
              {"seed", c.seed},     {"burnin", c.burnin},  {"samples", c.samples},
              {"workers", c.workers}, {"mspe", c.mspe},    {"out", c.out.string()}};
}

json to_json(const DiagnoseConfig& c) {
  return json{{"command", "diagnose"},
              {"data", c.data.string()},
              {"fit", c.fit ? json(c.fit->string()) : json(nullptr)},
              {"out", c.out.string()},
              {"d", c.d},
              {"d_prime", c.d_prime},
              {"delta", c.delta},
              {"n_probe", c.n_probe},
              {"seed", c.seed},
              {"oracle", c.oracle},
              {"oracle_sweeps", c.oracle_sweeps},
              {"latent_sweeps", c.latent_sweeps},
              {"engine", c.engines}};
}

void write_dataset(const fs::path& dir, const SimDataset& data, const json& provenance) {
  fs::create_directories(dir);
  io::write_design_csv(dir / "X.csv", data.x_raw);
  io::write_response_csv(dir / "e.csv", data.e);
  io::write_groups_json(dir / "groups.json", data.design.groups());
  json truth{{"beta0", io::to_json(data.beta0)},
             {"true_model", io::to_json(data.true_model)},
             {"seed", data.seed},
             {"attempts", data.attempts},
             {"simulation", provenance}};
  if (data.x_test_raw.rows() > 0) {
    io::write_design_csv(dir / "X_test.csv", data.x_test_raw);
    io::write_response_csv(dir / "e_test.csv", data.e_test);
    truth["true_prob_test"] = io::to_json(data.true_prob_test);
  }
  io::write_json(dir / "truth.json", truth);
}

LoadedData load_training(const fs::path& dir) {
  LoadedData d;
  d.x_raw = io::read_design_csv(dir / "X.csv");
  d.e = io::read_response_csv(dir / "e.csv");
  d.groups = io::read_groups_json(dir / "groups.json");
  const Index p = d.x_raw.cols();
  if (d.e.size() != d.x_raw.rows()) {
    throw ConsistencyError("e.csv has " + std::to_string(d.e.size()) + " rows but X.csv has " +
                           std::to_string(d.x_raw.rows()));
  }
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  for (std::size_t g = 0; g < d.groups.size(); ++g) {
    for (Index c : d.groups[g]) {
      if (c < 0 || c >= p) {
        throw ConsistencyError("groups.json group " + std::to_string(g + 1) + " references column " +
                               std::to_string(c + 1) + " but X.csv has " + std::to_string(p) +
                               " columns");
      }
      seen[static_cast<std::size_t>(c)] = 1;
    }
  }
  for (Index c = 0; c < p; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw ConsistencyError("X.csv column " + std::to_string(c + 1) +
                             " is not assigned to any group in groups.json");
    }
  }
  return d;
}

SimDataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "truth.json")) {
    throw ConsistencyError("truth.json not found in " + dir.string() +
                           "; simulation truth is required");
  }
  LoadedData ld = load_training(dir);
  json truth = io::read_json(dir / "truth.json");
  GroupedDesign design = validate_design(ld.x_raw, ld.groups);
  SimDataset data{design, ld.x_raw, ld.e, {}, {}, Matrix(0, ld.x_raw.cols()), Matrix(0, ld.x_raw.cols()),
                  Binary(0), Vector(0), truth.value("seed", std::uint64_t{0}), truth.value("attempts", 1)};
  data.beta0 = io::vector_from_json(truth.at("beta0"));
  if (data.beta0.size() != ld.x_raw.cols()) {
    throw ConsistencyError("truth.json beta0 has " + std::to_string(data.beta0.size()) +
                           " entries but X.csv has " + std::to_string(ld.x_raw.cols()) + " columns");
  }
  data.true_model = io::group_set_from_json(truth.at("true_model"), design.r());
  if (fs::exists(dir / "X_test.csv")) {
    data.x_test_raw = io::read_design_csv(dir / "X_test.csv");
    data.e_test = io::read_response_csv(dir / "e_test.csv");
    if (data.x_test_raw.cols() != ld.x_raw.cols() || data.e_test.size() != data.x_test_raw.rows()) {
      throw ConsistencyError("test files in " + dir.string() + " do not match the training design");
    }
    data.test_x = design.transform(data.x_test_raw);
    data.true_prob_test = predict_probabilities(data.x_test_raw, data.beta0);
  }
  return data;
}

void cmd_simulate(const SimulateConfig& c, std::ostream& log) {
  SimConfig sc = design_config(c.design, setting_from_int(c.setting), covariance_from_string(c.cov), c.seed);
  if (c.n < 0 || c.r < 0 || c.active < 0 || c.n_test < 0) throw UsageError("sizes must be non-negative");
  if (c.n > 0) sc.n = c.n;
  if (c.r > 0) sc.r = c.r;
  if (c.active > 0) sc.n_active = c.active;
  if (sc.n_active > sc.r) throw UsageError("--active exceeds the number of groups");
  sc.n_test = c.n_test;
  sc.rho = c.rho;
  SimDataset data = gen_dataset(sc);
  json echo = to_json(c);
  json provenance = echo;
  provenance.erase("out");  // keeps the data files independent of their location
  write_dataset(c.out, data, provenance);
  io::write_json(c.out / "config.json", echo);
  log << "simulate: n=" << data.design.n() << " p=" << data.design.p() << " r=" << data.design.r()
      << " -> " << c.out.string() << '\n';
}

void cmd_fit(const FitConfig& c, std::ostream& log) {
  if (c.samples < 1) throw UsageError("--samples must be at least 1; selection needs posterior draws");
  if (c.burnin < 0) throw UsageError("--burnin must be non-negative");
  check_choice(c.draws_format, {"csv", "bin"}, "--draws-format");
  Engine engine = engine_from_string(c.engine);

  LoadedData ld = load_training(c.data);
  GroupedDesign design = validate_design(ld.x_raw, ld.groups);
  Hyperparams dflt = default_hyperparams(design.n(), design.r());
  Hyperparams hyper = Hyperparams::make(c.tau2.value_or(dflt.tau2), c.q.value_or(dflt.q), c.nu,
                                        c.max_model_groups);

  RunOptions opt;
  opt.n_burnin = c.burnin;
  opt.n_samples = c.samples;
  opt.init.n_active = c.init_active;
  opt.fast_threshold = c.fast_threshold;
  opt.full_weight_system = c.full_weight_system;
  opt.block_moves = c.block_moves;
  PosteriorDraws draws = run_engine(engine, design, ld.e, hyper, opt, c.seed);
  SelectionReport rep = summarize_draws(draws, design, ld.e);

  fs::create_directories(c.out);
  if (c.draws_format == "bin") {
    io::write_draws_bin(c.out / "draws.bin", draws.z_draws);
  } else {
    io::write_draws_csv(c.out / "draws.csv", draws.z_draws);
  }
  io::write_inclusion_csv(c.out / "inclusion.csv", rep.inclusion_prob);

  std::vector<std::pair<std::string, long>> top(rep.model_counts.begin(), rep.model_counts.end());
  std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  json top_models = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(top.size(), 10); ++k) {
    GroupSet m;
    for (std::size_t j = 0; j < top[k].first.size(); ++j)
      if (top[k].first[j] == '1') m.push_back(static_cast<int>(j));
    top_models.push_back({{"model", io::to_json(m)}, {"count", top[k].second}});
  }
  json selection{{"r", design.r()},
                 {"p", design.p()},
                 {"median_probability_model", io::to_json(rep.selected)},
                 {"highest_frequency_model", io::to_json(rep.highest_frequency)},
                 {"inclusion_probability", io::to_json(rep.inclusion_prob)},
                 {"refit", {{"model", io::to_json(rep.selected)},
                            {"beta", io::to_json(rep.refit_beta)},
                            {"separated", rep.refit_separated},
                            {"scale", "standardized"}}},
                 {"column_means", io::to_json(design.column_means())},
                 {"column_sds", io::to_json(design.column_sds())},
                 {"top_models", top_models}};
  io::write_json(c.out / "selection.json", selection);

  FitConfig resolved = c;
  resolved.tau2 = hyper.tau2;
  resolved.q = hyper.q;
  json echo = to_json(resolved);
  io::write_json(c.out / "run_meta.json",
                 json{{"engine", to_string(engine)},
                      {"seed", c.seed},
                      {"n_burnin", draws.n_burnin},
                      {"n_samples", draws.n_samples},
                      {"elapsed_seconds", draws.elapsed_seconds},
                      {"n", design.n()},
                      {"p", design.p()},
                      {"r", design.r()},
                      {"hyperparams", io::to_json(hyper)},
                      {"config", echo}});
  io::write_json(c.out / "config.json", echo);
  log << "fit(" << to_string(engine) << "): selected " << io::to_json(rep.selected).dump() << " in "
      << draws.elapsed_seconds << " s -> " << c.out.string() << '\n';
}

void cmd_evaluate(const EvaluateConfig& c, std::ostream& log) {
  check_choice(c.mode, {"auto", "selection", "prediction"}, "--mode");
  MspeScale scale = mspe_scale_from_string(c.mspe);
  json sel = io::read_json(c.fit / "selection.json");
  const int r = sel.at("r").get<int>();
  const Index p = sel.at("p").get<Index>();
  GroupSet selected = io::group_set_from_json(sel.at("median_probability_model"), r);
  Vector beta = io::vector_from_json(sel.at("refit").at("beta"));
  Vector means = io::vector_from_json(sel.at("column_means"));
  Vector sds = io::vector_from_json(sel.at("column_sds"));

  const bool has_truth = fs::exists(c.data / "truth.json");
  std::string mode = c.mode;
  if (mode == "auto") mode = has_truth ? "selection" : "prediction";
  if (mode == "selection" && !has_truth) {
    throw ConsistencyError("selection metrics need truth.json in " + c.data.string() +
                           "; use --mode prediction for prediction-only evaluation");
  }
  const bool has_test = fs::exists(c.data / "X_test.csv");

  json metrics{{"mode", mode}, {"model", io::to_json(selected)}};
  Matrix test_x;
  Binary e_test;
  if (has_test) {
    Matrix raw = io::read_design_csv(c.data / "X_test.csv");
    e_test = io::read_response_csv(c.data / "e_test.csv");
    if (raw.cols() != p || e_test.size() != raw.rows()) {
      throw ConsistencyError("test files in " + c.data.string() + " do not match selection.json (p=" +
                             std::to_string(p) + ")");
    }
    test_x = apply_moments(raw, means, sds);
  }

  if (mode == "selection") {
    GroupSet truth = io::group_set_from_json(io::read_json(c.data / "truth.json").at("true_model"), r);
    Confusion cm = group_confusion(selected, truth, r);
    auto ratio = [](long a, long b) { return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
    metrics["sensitivity"] = ratio(cm.tp, cm.tp + cm.fn);
    metrics["specificity"] = ratio(cm.tn, cm.tn + cm.fp);
    metrics["mcc"] = matthews_correlation(cm);
    metrics["n_errors"] = cm.fp + cm.fn;
    metrics["tp"] = cm.tp;
    metrics["tn"] = cm.tn;
    metrics["fp"] = cm.fp;
    metrics["fn"] = cm.fn;
    metrics["true_model"] = io::to_json(truth);
  }
  if (has_test) {
    metrics["mspe"] = prediction_error(beta, test_x, e_test, scale);
    metrics["mspe_scale"] = to_string(scale);
    Vector prob = predict_probabilities(test_x, beta);
    long wrong = 0;
    for (Index i = 0; i < prob.size(); ++i) wrong += (prob(i) >= c.cutoff ? 1 : 0) != e_test(i);
    metrics["cutoff"] = c.cutoff;
    metrics["misclassification_rate"] =
        prob.size() ? static_cast<double>(wrong) / static_cast<double>(prob.size()) : 0.0;
    RocCurve roc = roc_curve(beta, test_x, e_test);
    metrics["auc"] = roc.auc;
    io::write_roc_csv(c.out / "roc.csv", roc);
  } else {
    metrics["mspe"] = nullptr;
  }
  io::write_json(c.out / "metrics.json", metrics);
  io::write_json(c.out / "config.json", to_json(c));
  log << "evaluate(" << mode << "): " << metrics.dump() << '\n';
}

void cmd_batch(const BatchConfig& c, std::ostream& log) {
  if (c.reps < 1) throw UsageError("--reps must be at least 1");
  if (c.engines.empty()) throw UsageError("--engine needs at least one engine");
  for (const auto& e : c.engines) engine_from_string(e);
  mspe_scale_from_string(c.mspe);
  setting_from_int(c.setting);
  covariance_from_string(c.cov);

  struct Outcome {
    bool ok = false;
    std::uint64_t seed = 0;
    MetricSet metrics;
    std::string message;
  };
  const std::size_t n_engines = c.engines.size();
  std::vector<Outcome> outcomes(static_cast<std::size_t>(c.reps) * n_engines);
  fs::create_directories(c.out);
  io::write_json(c.out / "config.json", to_json(c));

  std::atomic<int> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    std::ostream quiet(nullptr);
    for (int rep = next++; rep < c.reps; rep = next++) {
      const std::uint64_t rep_seed = derive_seed(c.seed, static_cast<std::uint64_t>(rep));
      const fs::path dir = c.out / rep_name(rep);
      std::string data_error;
      try {
        SimulateConfig s;
        s.design = c.design;
        s.setting = c.setting;
        s.cov = c.cov;
        s.seed = rep_seed;
        s.out = dir / "data";
        cmd_simulate(s, quiet);
      } catch (const std::exception& ex) {
        data_error = std::string("simulate: ") + ex.what();
      }
      for (std::size_t k = 0; k < n_engines; ++k) {
        Outcome& o = outcomes[static_cast<std::size_t>(rep) * n_engines + k];
        o.seed = rep_seed;
        if (!data_error.empty()) {
          o.message = data_error;
          continue;
        }
        try {
          FitConfig f;
          f.data = dir / "data";
          f.out = dir / c.engines[k] / "fit";
          f.engine = c.engines[k];
          f.burnin = c.burnin;
          f.samples = c.samples;
          f.seed = rep_seed;
          f.draws_format = "bin";
          cmd_fit(f, quiet);
          EvaluateConfig ev;
          ev.fit = f.out;
          ev.data = f.data;
          ev.out = dir / c.engines[k] / "eval";
          ev.mode = "selection";
          ev.mspe = c.mspe;
          cmd_evaluate(ev, quiet);
          json m = io::read_json(ev.out / "metrics.json");
          o.metrics.sensitivity = m.at("sensitivity").get<double>();
          o.metrics.specificity = m.at("specificity").get<double>();
          o.metrics.mcc = m.at("mcc").get<double>();
          o.metrics.mspe = m.at("mspe").get<double>();
          o.metrics.n_errors = m.at("n_errors").get<long>();
          o.ok = true;
        } catch (const std::exception& ex) {
          o.message = ex.what();
        }
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "batch: " << rep_name(rep) << " done\n";
    }
  };
  int workers = c.workers > 0 ? c.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, c.reps);
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream reps_csv(c.out / "reps.csv");
  reps_csv << "rep,seed,engine,status,sensitivity,specificity,mcc,mspe,n_errors,message\n";
  std::ofstream summary(c.out / "summary.csv");
  summary << "design,setting,covariance,engine,reps,failures,sensitivity,specificity,mcc,mspe,n_errors\n";
  long total_failures = 0;
  for (std::size_t k = 0; k < n_engines; ++k) {
    MetricSet mean;
    double n_errors = 0.0;
    long ok = 0, failed = 0;
    for (int rep = 0; rep < c.reps; ++rep) {
      const Outcome& o = outcomes[static_cast<std::size_t>(rep) * n_engines + k];
      reps_csv << (rep + 1) << ',' << o.seed << ',' << c.engines[k] << ',' << (o.ok ? "ok" : "failed")
               << ',';
      if (o.ok) {
        reps_csv << io::format_real(o.metrics.sensitivity) << ',' << io::format_real(o.metrics.specificity)
                 << ',' << io::format_real(o.metrics.mcc) << ',' << io::format_real(o.metrics.mspe) << ','
                 << o.metrics.n_errors << ",\n";
        mean.sensitivity += o.metrics.sensitivity;
        mean.specificity += o.metrics.specificity;
        mean.mcc += o.metrics.mcc;
        mean.mspe += o.metrics.mspe;
        n_errors += static_cast<double>(o.metrics.n_errors);
        ++ok;
      } else {
        reps_csv << ",,,,," << csv_quote(o.message) << '\n';
        ++failed;
      }
    }
    total_failures += failed;
    auto avg = [ok](double s) { return ok ? io::format_real(s / static_cast<double>(ok)) : std::string("nan"); };
    summary << c.design << ',' << c.setting << ',' << c.cov << ',' << c.engines[k] << ',' << c.reps << ','
            << failed << ',' << avg(mean.sensitivity) << ',' << avg(mean.specificity) << ','
            << avg(mean.mcc) << ',' << avg(mean.mspe) << ',' << avg(n_errors) << '\n';
    log << "batch(" << c.engines[k] << "): " << ok << "/" << c.reps << " ok";
    if (failed) log << ", " << failed << " FAILED (see reps.csv)";
    log << '\n';
  }
  if (total_failures == static_cast<long>(outcomes.size())) {
    throw Error(ErrorKind::numerical, "every replication failed; see " + (c.out / "reps.csv").string());
  }
}

void cmd_diagnose(const DiagnoseConfig& c, std::ostream& log) {
  check_choice(c.oracle, {"auto", "on", "off"}, "--oracle");
  if (c.engines.empty()) throw UsageError("--engine needs at least one engine");
  std::vector<Engine> engines;
  for (const auto& e : c.engines) engines.push_back(engine_from_string(e));
  SimDataset data = load_dataset(c.data);
  const GroupedDesign& design = data.design;
  const int r = design.r();
  const bool run_oracle = c.oracle == "on" || (c.oracle == "auto" && r <= 4);
  if (run_oracle && r > kMaxEnumerationGroups) {
    throw SizeError("oracle enumeration supports at most " + std::to_string(kMaxEnumerationGroups) +
                    " groups, the data has " + std::to_string(r));
  }
  Hyperparams hyper = default_hyperparams(design.n(), r, c.delta);

  fs::create_directories(c.out);
  ConditionReport report = condition_report(data, hyper, c.d, c.d_prime, c.n_probe, c.seed, c.delta);
  json cr = io::to_json(report);
  cr["n"] = design.n();
  cr["p"] = design.p();
  cr["r"] = r;
  cr["hyperparams"] = io::to_json(hyper);
  io::write_json(c.out / "condition_report.json", cr);
  log << "diagnose: m_n=" << report.m_n << " lambda_hat=" << report.lambda_hat
      << " Lambda_hat=" << report.Lambda_hat << '\n';

  if (run_oracle) {
    GibbsSampler warm(design, data.e, hyper);
    Rng rng(derive_seed(c.seed, 1));
    warm.initialize(InitPolicy{}, rng);
    for (long s = 0; s < c.latent_sweeps; ++s) warm.sweep(rng);
    const Vector y = warm.state().y;
    const Vector weights = warm.state().s2.cwiseInverse();

    json out{{"sweeps", c.oracle_sweeps}, {"latent_sweeps", c.latent_sweeps}};
    json engines_json = json::object();
    json models = json::array();
    for (std::size_t k = 0; k < engines.size(); ++k) {
      OracleComparison oc = compare_chain_to_oracle(engines[k], design, y, weights, hyper,
                                                    c.oracle_sweeps, derive_seed(c.seed, 2 + k));
      if (models.empty()) {
        for (const auto& m : oc.exact.models) models.push_back(io::to_json(m));
        out["exact"] = io::to_json(oc.exact.probs);
      }
      engines_json[to_string(engines[k])] = {{"tv", oc.tv}, {"empirical", io::to_json(oc.empirical)}};
      log << "diagnose: oracle tv(" << to_string(engines[k]) << ")=" << oc.tv << '\n';
    }
    out["models"] = models;
    out["engines"] = engines_json;
    io::write_json(c.out / "oracle_tv.json", out);
  }

  if (c.fit) {
    PosteriorDraws draws;
    draws.z_draws = read_draws(*c.fit);
    if (draws.r() != r) {
      throw ConsistencyError("draws in " + c.fit->string() + " have " + std::to_string(draws.r()) +
                             " groups but the data has " + std::to_string(r));
    }
    draws.n_samples = draws.z_draws.rows();
    PosteriorRatioTrace trace = posterior_ratio_trace(draws, data.true_model);
    json ratios = json::object();
    if (trace.true_model_visited) {
      for (const auto& [key, ratio] : trace.ratios) ratios[key] = ratio;
    }
    io::write_json(c.out / "posterior_ratio.json",
                   json{{"true_model", io::to_json(data.true_model)},
                        {"true_model_prob", trace.true_model_prob},
                        {"true_model_visited", trace.true_model_visited},
                        {"superset_prob", trace.superset_prob},
                        {"max_ratio", trace.ratios.empty() || !trace.true_model_visited
                                          ? json(nullptr)
                                          : json(std::max_element(trace.ratios.begin(), trace.ratios.end(),
                                                                  [](const auto& a, const auto& b) {
                                                                    return a.second < b.second;
                                                                  })
                                                     ->second)},
                        {"ratios", ratios}});
  }
  io::write_json(c.out / "config.json", to_json(c));
}

namespace {

// Rewrites `--config FILE` into `--key=value` tokens placed before the
// user's own options, so explicit flags win under the take-last policy.
std::vector<std::string> expand_config(std::vector<std::string> tokens) {
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    std::string path;
    std::size_t consumed = 0;
    if (tokens[i] == "--config") {
      if (i + 1 >= tokens.size()) throw UsageError("--config needs a file argument");
      path = tokens[i + 1];
      consumed = 2;
    } else if (tokens[i].rfind("--config=", 0) == 0) {
      path = tokens[i].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    json cfg = io::read_json(path);
    if (!cfg.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
    std::vector<std::string> injected;
    for (const auto& [key, value] : cfg.items()) {
      if (key == "command") {
        if (!value.is_string() || value.get<std::string>() != tokens[0]) {
          throw UsageError("config file " + path + " is for command '" + value.dump() + "'");
        }
        continue;
      }
      if (value.is_null()) continue;
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else if (value.is_array()) {
        for (std::size_t k = 0; k < value.size(); ++k) {
          if (k) text += ',';
          text += value[k].is_string() ? value[k].get<std::string>() : value[k].dump();
        }
      } else if (value.is_object()) {
        throw UsageError("config key '" + key + "' must not be an object");
      } else {
        text = value.dump();
      }
      injected.push_back("--" + name + "=" + text);
    }
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(i + consumed));
    tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
    return expand_config(tokens);
  }
  return tokens;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian group selection for logistic regression with group spike-and-slab priors", "gss"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "gss 0.1.0");
  const std::string config_help = "JSON file supplying any option; command-line flags override it";
  std::string config_file;

  SimulateConfig sim;
  std::string sim_out = ".";
  auto* s = app.add_subcommand("simulate", "Generate a simulated dataset");
  s->add_option("--design", sim.design, "Design 1, 2 or 3")->capture_default_str();
  s->add_option("--setting", sim.setting, "Signal setting 1-4")->capture_default_str();
  s->add_option("--cov", sim.cov, "isotropic | cs | ar1")->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--n", sim.n, "Training size (0: design default)");
  s->add_option("--r", sim.r, "Number of groups (0: design default)");
  s->add_option("--active", sim.active, "Number of active groups (0: design default)");
  s->add_option("--n-test", sim.n_test)->capture_default_str();
  s->add_option("--rho", sim.rho)->capture_default_str();
  s->add_option("--out", sim_out, "Output directory")->capture_default_str();
  s->add_option("--config", config_file, config_help);

  FitConfig fit;
  std::string fit_data = ".", fit_out = ".";
  auto* f = app.add_subcommand("fit", "Run a sampler and select a model");
  f->add_option("--data", fit_data, "Directory with X.csv, e.csv, groups.json")->capture_default_str();
  f->add_option("--out", fit_out)->capture_default_str();
  f->add_option("--engine", fit.engine, "gibbs | neuronized")->capture_default_str();
  f->add_option("--burnin", fit.burnin)->capture_default_str();
  f->add_option("--samples", fit.samples)->capture_default_str();
  f->add_option("--seed", fit.seed)->capture_default_str();
  f->add_option("--tau2", fit.tau2, "Slab variance (default from n and r)");
  f->add_option("--q", fit.q, "Prior inclusion probability (default 1/r)");
  f->add_option("--nu", fit.nu)->capture_default_str();
  f->add_option("--max-model-groups", fit.max_model_groups, "Cap on the number of active groups");
  f->add_option("--init-active", fit.init_active)->capture_default_str();
  f->add_option("--draws-format", fit.draws_format, "csv | bin")->capture_default_str();
  f->add_option("--fast-threshold", fit.fast_threshold, "Fast weight sampler above this size");
  f->add_flag("--full-weight-system", fit.full_weight_system);
  f->add_option("--block-moves", fit.block_moves, "Neuronized engine: collapsed block update per group")
      ->capture_default_str();
  f->add_option("--config", config_file, config_help);

  EvaluateConfig ev;
  std::string ev_fit = ".", ev_data = ".", ev_out = ".";
  auto* e = app.add_subcommand("evaluate", "Selection and prediction metrics for a fit");
  e->add_option("--fit", ev_fit, "Directory with selection.json")->capture_default_str();
  e->add_option("--data", ev_data, "Directory with test files and truth.json")->capture_default_str();
  e->add_option("--out", ev_out)->capture_default_str();
  e->add_option("--mode", ev.mode, "auto | selection | prediction")->capture_default_str();
  e->add_option("--mspe", ev.mspe, "probability | linear")->capture_default_str();
  e->add_option("--cutoff", ev.cutoff)->capture_default_str();
  e->add_option("--config", config_file, config_help);

  BatchConfig batch;
  std::string batch_out = ".";
  auto* b = app.add_subcommand("batch", "Replicated simulate/fit/evaluate runs");
  b->add_option("--design", batch.design)->capture_default_str();
  b->add_option("--setting", batch.setting)->capture_default_str();
  b->add_option("--cov", batch.cov)->capture_default_str();
  b->add_option("--engine", batch.engines, "Comma-separated engines")->delimiter(',')->capture_default_str();
  b->add_option("--reps", batch.reps)->capture_default_str();
  b->add_option("--seed", batch.seed)->capture_default_str();
  b->add_option("--burnin", batch.burnin)->capture_default_str();
  b->add_option("--samples", batch.samples)->capture_default_str();
  b->add_option("--workers", batch.workers, "0: one per hardware thread")->capture_default_str();
  b->add_option("--mspe", batch.mspe)->capture_default_str();
  b->add_option("--out", batch_out)->capture_default_str();
  b->add_option("--config", config_file, config_help);

  DiagnoseConfig diag;
  std::string diag_data = ".", diag_fit, diag_out = ".";
  auto* d = app.add_subcommand("diagnose", "Condition report, oracle check and posterior ratios");
  d->add_option("--data", diag_data, "Simulated dataset directory (needs truth.json)")->capture_default_str();
  d->add_option("--fit", diag_fit, "Fit directory; enables posterior_ratio.json");
  d->add_option("--out", diag_out)->capture_default_str();
  d->add_option("--d", diag.d)->capture_default_str();
  d->add_option("--d-prime", diag.d_prime)->capture_default_str();
  d->add_option("--delta", diag.delta)->capture_default_str();
  d->add_option("--n-probe", diag.n_probe)->capture_default_str();
  d->add_option("--seed", diag.seed)->capture_default_str();
  d->add_option("--oracle", diag.oracle, "auto (r <= 4) | on | off")->capture_default_str();
  d->add_option("--oracle-sweeps", diag.oracle_sweeps)->capture_default_str();
  d->add_option("--latent-sweeps", diag.latent_sweeps)->capture_default_str();
  d->add_option("--engine", diag.engines)->delimiter(',')->capture_default_str();
  d->add_option("--config", config_file, config_help);

  try {
    std::vector<std::string> tokens = args.empty() ? args : expand_config(args);
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << "gss 0.1.0\n";
      return 0;
    } catch (const CLI::ParseError& ex) {
      err << "error: " << ex.what() << '\n';
      return static_cast<int>(ErrorKind::usage);
    }

    if (s->parsed()) {
      sim.out = sim_out;
      cmd_simulate(sim, out);
    } else if (f->parsed()) {
      fit.data = fit_data;
      fit.out = fit_out;
      cmd_fit(fit, out);
    } else if (e->parsed()) {
      ev.fit = ev_fit;
      ev.data = ev_data;
      ev.out = ev_out;
      cmd_evaluate(ev, out);
    } else if (b->parsed()) {
      batch.out = batch_out;
      cmd_batch(batch, out);
    } else if (d->parsed()) {
      diag.data = diag_data;
      if (!diag_fit.empty()) diag.fit = fs::path(diag_fit);
      diag.out = diag_out;
      cmd_diagnose(diag, out);
    }
    return 0;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return static_cast<int>(ex.kind());
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  } catch (const json::exception& ex) {
    err << "error: malformed JSON input: " << ex.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return static_cast<int>(ErrorKind::numerical);
  }
}

}  // namespace gss::cli
