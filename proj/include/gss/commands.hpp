#pragma once

#include "gss/core.hpp"
#include "gss/inference.hpp"
#include "gss/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gss::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Every command writes its resolved configuration to <out>/config.json. The
// keys are the long option names, so `--config <out>/config.json` replays the
// run.

struct SimulateConfig {
  int design = 1;
  int setting = 4;
  std::string cov = "isotropic";
  std::uint64_t seed = 1;
  // Overrides of the design defaults; 0 keeps the default.
  Index n = 0;
  int r = 0;
  int active = 0;
  Index n_test = 100;
  double rho = 0.5;
  fs::path out = ".";
};

struct FitConfig {
  fs::path data = ".";
  fs::path out = ".";
  std::string engine = "gibbs";
  long burnin = 2000;
  long samples = 2000;
  std::uint64_t seed = 1;
  std::optional<double> tau2;
  std::optional<double> q;
  double nu = 7.3;
  std::optional<int> max_model_groups;
  int init_active = 3;
  std::string draws_format = "csv";
  std::optional<Index> fast_threshold;
  bool full_weight_system = false;
  bool block_moves = true;
};

struct EvaluateConfig {
  fs::path fit = ".";
  fs::path data = ".";
  fs::path out = ".";
  std::string mode = "auto";  // auto | selection | prediction
  std::string mspe = "probability";
  double cutoff = 0.5;
};

struct BatchConfig {
  int design = 1;
  int setting = 4;
  std::string cov = "isotropic";
  std::vector<std::string> engines{"gibbs"};
  int reps = 50;
  std::uint64_t seed = 1;
  long burnin = 2000;
  long samples = 2000;
  int workers = 0;  // 0: hardware concurrency
  std::string mspe = "probability";
  fs::path out = ".";
};

struct DiagnoseConfig {
  fs::path data = ".";
  std::optional<fs::path> fit;
  fs::path out = ".";
  double d = 0.0;
  double d_prime = 1.0;
  double delta = 0.01;
  int n_probe = 2000;
  std::uint64_t seed = 1;
  std::string oracle = "auto";  // auto | on | off
  long oracle_sweeps = 20000;
  long latent_sweeps = 200;
  std::vector<std::string> engines{"gibbs", "neuronized"};
};

json to_json(const SimulateConfig& c);
json to_json(const FitConfig& c);
json to_json(const EvaluateConfig& c);
json to_json(const BatchConfig& c);
json to_json(const DiagnoseConfig& c);

// Dataset directory layout written by `simulate`.
void write_dataset(const fs::path& dir, const SimDataset& data, const json& provenance);

struct LoadedData {
  Matrix x_raw;
  Binary e;
  Partition groups;
};
// X.csv, e.csv and groups.json, cross-checked.
LoadedData load_training(const fs::path& dir);
// Adds truth.json; throws ConsistencyError when it is missing.
SimDataset load_dataset(const fs::path& dir);

void cmd_simulate(const SimulateConfig& config, std::ostream& log);
void cmd_fit(const FitConfig& config, std::ostream& log);
void cmd_evaluate(const EvaluateConfig& config, std::ostream& log);
void cmd_batch(const BatchConfig& config, std::ostream& log);
void cmd_diagnose(const DiagnoseConfig& config, std::ostream& log);

// Parses `args` (without the program name) and dispatches. Returns the exit
// code: 0 success, 1 usage, 2 data or I/O, 3 numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gss::cli
