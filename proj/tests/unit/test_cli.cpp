#include "gss/commands.hpp"
#include "gss/distributions.hpp"
#include "gss/errors.hpp"
#include "gss/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

using namespace gss;
using namespace gss::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh scratch directory per test case, removed afterwards.
struct Scratch {
  fs::path root;
  Scratch() {
    static int counter = 0;
    root = fs::temp_directory_path() /
           ("gss_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  std::string operator/(const std::string& name) const { return (root / name).string(); }
};

// Design 1 / Setting 4 data shared by the fit and evaluate tests.
const fs::path& design1_dir() {
  static Scratch keep;
  static const fs::path dir = [] {
    fs::path d = keep.root / "data";
    Result r = run({"simulate", "--design", "1", "--setting", "4", "--cov", "isotropic", "--seed", "7",
                    "--out", d.string()});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("simulate writes the dataset files") {
  const fs::path& d = design1_dir();
  for (const char* f : {"X.csv", "e.csv", "groups.json", "truth.json", "X_test.csv", "e_test.csv", "config.json"})
    CHECK(fs::exists(d / f));
  json groups = io::read_json(d / "groups.json");
  std::size_t total = 0;
  for (const auto& g : groups) total += g.size();
  io::CsvTable x = io::read_csv(d / "X.csv");
  CHECK(total == static_cast<std::size_t>(x.values.cols()));
  CHECK(x.header.front() == "col_1");
  CHECK(x.values.rows() == 100);
  CHECK(groups.size() == 50);
  CHECK(groups[0][0] == 1);
  json truth = io::read_json(d / "truth.json");
  CHECK(truth.at("true_model") == json::array({1, 2, 3}));
}

TEST_CASE("simulate is byte-identical for equal seeds") {
  Scratch s;
  for (const char* dir : {"a", "b"}) {
    REQUIRE(run({"simulate", "--design", "2", "--setting", "1", "--cov", "ar1", "--seed", "3", "--out", s / dir})
                .code == 0);
  }
  for (const char* f : {"X.csv", "e.csv", "groups.json", "truth.json", "X_test.csv", "e_test.csv"}) {
    CHECK(slurp(s.root / "a" / f) == slurp(s.root / "b" / f));
  }
  REQUIRE(run({"simulate", "--design", "2", "--setting", "1", "--cov", "ar1", "--seed", "4", "--out", s / "c"})
              .code == 0);
  CHECK(slurp(s.root / "a" / "X.csv") != slurp(s.root / "c" / "X.csv"));
}

TEST_CASE("simulate --design 3 has 100 groups") {
  Scratch s;
  REQUIRE(run({"simulate", "--design", "3", "--setting", "3", "--seed", "1", "--out", s / "d"}).code == 0);
  CHECK(io::read_json(s.root / "d" / "groups.json").size() == 100);
}

TEST_CASE("fit selects the true groups with either engine") {
  Scratch s;
  for (const char* engine : {"gibbs", "neuronized"}) {
    const std::string out = s / engine;
    Result r = run({"fit", "--data", design1_dir().string(), "--engine", engine, "--burnin", "2000",
                    "--samples", "2000", "--seed", "1", "--out", out});
    REQUIRE(r.code == 0);
    json sel = io::read_json(fs::path(out) / "selection.json");
    CHECK(sel.at("median_probability_model") == json::array({1, 2, 3}));
    CHECK(sel.at("highest_frequency_model") == json::array({1, 2, 3}));
    CHECK(fs::exists(fs::path(out) / "run_meta.json"));
    io::CsvTable inc = io::read_csv(fs::path(out) / "inclusion.csv");
    CHECK(inc.header == std::vector<std::string>{"group_id", "probability"});
    CHECK(inc.values.rows() == 50);
    CHECK(io::read_draws_csv(fs::path(out) / "draws.csv").rows() == 2000);
    json meta = io::read_json(fs::path(out) / "run_meta.json");
    CHECK(meta.at("engine") == engine);
    CHECK(meta.at("config").at("tau2") == 1.0);
    CHECK(meta.at("config").at("q") == 0.02);
  }
}

TEST_CASE("fit argument and data errors map to exit codes") {
  Scratch s;
  const std::string data = design1_dir().string();
  CHECK(run({"fit", "--data", data, "--samples", "0", "--out", s / "f"}).code == 1);
  CHECK(run({"fit", "--data", data, "--engine", "metropolis", "--out", s / "f"}).code == 1);
  CHECK(run({"fit", "--data", data, "--draws-format", "parquet", "--out", s / "f"}).code == 1);
  CHECK(run({"fit", "--data", s / "nowhere", "--out", s / "f"}).code == 2);

  // groups.json pointing past the last column
  fs::copy(design1_dir(), s.root / "bad");
  json groups = io::read_json(s.root / "bad" / "groups.json");
  const std::size_t p = io::read_csv(s.root / "bad" / "X.csv").values.cols();
  groups.back().push_back(p + 1);
  io::write_json(s.root / "bad" / "groups.json", groups);
  Result r = run({"fit", "--data", s / "bad", "--samples", "5", "--burnin", "0", "--out", s / "f"});
  CHECK(r.code == 2);
  CHECK(r.err.find(std::to_string(p + 1)) != std::string::npos);

  // e.csv with a missing row
  fs::copy(design1_dir(), s.root / "short");
  std::string e = slurp(s.root / "short" / "e.csv");
  e.erase(e.rfind('\n', e.size() - 2) + 1);
  std::ofstream(s.root / "short" / "e.csv") << e;
  r = run({"fit", "--data", s / "short", "--samples", "5", "--out", s / "f"});
  CHECK(r.code == 2);
  CHECK(r.err.find("99") != std::string::npos);
}

TEST_CASE("evaluate a perfect selection") {
  Scratch s;
  const std::string data = design1_dir().string();
  REQUIRE(run({"fit", "--data", data, "--burnin", "1000", "--samples", "1000", "--out", s / "fit"}).code == 0);
  REQUIRE(run({"evaluate", "--fit", s / "fit", "--data", data, "--out", s / "eval"}).code == 0);
  json m = io::read_json(s.root / "eval" / "metrics.json");
  CHECK(m.at("mode") == "selection");
  CHECK(m.at("mcc") == 1.0);
  CHECK(m.at("sensitivity") == 1.0);
  CHECK(m.at("specificity") == 1.0);
  CHECK(m.at("mspe").get<double>() < 0.25);
  io::CsvTable roc = io::read_csv(s.root / "eval" / "roc.csv");
  CHECK(roc.header == std::vector<std::string>{"threshold", "fpr", "tpr"});
  const Index last = roc.values.rows() - 1;
  CHECK(roc.values(0, 1) == 0.0);
  CHECK(roc.values(0, 2) == 0.0);
  CHECK(roc.values(last, 1) == 1.0);
  CHECK(roc.values(last, 2) == 1.0);
}

TEST_CASE("evaluate without truth") {
  Scratch s;
  fs::copy(design1_dir(), s.root / "data");
  fs::remove(s.root / "data" / "truth.json");
  REQUIRE(run({"fit", "--data", s / "data", "--burnin", "50", "--samples", "50", "--out", s / "fit"}).code == 0);
  Result r = run({"evaluate", "--fit", s / "fit", "--data", s / "data", "--mode", "selection", "--out", s / "e1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("truth") != std::string::npos);
  REQUIRE(run({"evaluate", "--fit", s / "fit", "--data", s / "data", "--out", s / "e2"}).code == 0);
  json m = io::read_json(s.root / "e2" / "metrics.json");
  CHECK(m.at("mode") == "prediction");
  CHECK_FALSE(m.contains("mcc"));
  CHECK(m.contains("mspe"));
}

TEST_CASE("a one-replication batch equals the single pipeline") {
  Scratch s;
  Result b = run({"batch", "--design", "1", "--setting", "4", "--reps", "1", "--seed", "5", "--burnin", "200",
                  "--samples", "200", "--workers", "1", "--out", s / "batch"});
  REQUIRE(b.code == 0);
  const std::string seed = std::to_string(derive_seed(5, 0));
  REQUIRE(run({"simulate", "--design", "1", "--setting", "4", "--seed", seed, "--out", s / "data"}).code == 0);
  REQUIRE(run({"fit", "--data", s / "data", "--burnin", "200", "--samples", "200", "--seed", seed,
               "--draws-format", "bin", "--out", s / "fit"}).code == 0);
  REQUIRE(run({"evaluate", "--fit", s / "fit", "--data", s / "data", "--mode", "selection", "--out", s / "eval"})
              .code == 0);
  const fs::path rep = s.root / "batch" / "rep_0001";
  CHECK(slurp(rep / "data" / "X.csv") == slurp(s.root / "data" / "X.csv"));
  CHECK(slurp(rep / "gibbs" / "fit" / "draws.bin") == slurp(s.root / "fit" / "draws.bin"));
  CHECK(slurp(rep / "gibbs" / "eval" / "metrics.json") == slurp(s.root / "eval" / "metrics.json"));
  std::string summary = slurp(s.root / "batch" / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
  CHECK(summary.find("1,4,isotropic,gibbs,1,0,") != std::string::npos);
}

TEST_CASE("diagnose on a three-group dataset") {
  Scratch s;
  REQUIRE(run({"simulate", "--design", "1", "--setting", "1", "--r", "3", "--active", "1", "--seed", "2",
               "--out", s / "data"}).code == 0);
  REQUIRE(run({"diagnose", "--data", s / "data", "--n-probe", "200", "--out", s / "diag"}).code == 0);
  json tv = io::read_json(s.root / "diag" / "oracle_tv.json");
  for (const char* engine : {"gibbs", "neuronized"}) CHECK(tv.at("engines").at(engine).at("tv").get<double>() < 0.05);
  json rep = io::read_json(s.root / "diag" / "condition_report.json");
  CHECK(rep.at("m_n") == 1.0);
  CHECK(rep.at("lambda_hat").get<double>() <= rep.at("Lambda_hat").get<double>());
}

TEST_CASE("diagnose reports m_n and needs the truth") {
  Scratch s;
  REQUIRE(run({"diagnose", "--data", design1_dir().string(), "--n-probe", "50", "--d-prime", "0.8", "--out",
               s / "diag"}).code == 0);
  json rep = io::read_json(s.root / "diag" / "condition_report.json");
  CHECK(rep.at("m_n").get<double>() == doctest::Approx(std::pow(100.0 / std::log(50.0), 0.1)).epsilon(1e-12));
  CHECK_FALSE(fs::exists(s.root / "diag" / "oracle_tv.json"));
  CHECK(run({"diagnose", "--data", design1_dir().string(), "--oracle", "on", "--out", s / "d2"}).code == 1);

  fs::copy(design1_dir(), s.root / "data");
  fs::remove(s.root / "data" / "truth.json");
  Result r = run({"diagnose", "--data", s / "data", "--out", s / "d3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("truth.json") != std::string::npos);
}

TEST_CASE("config files replay a run and flags override them") {
  Scratch s;
  const std::string data = design1_dir().string();
  REQUIRE(run({"fit", "--data", data, "--burnin", "30", "--samples", "40", "--seed", "11", "--out", s / "a"}).code ==
          0);
  REQUIRE(run({"fit", "--config", s / "a/config.json", "--out", s / "b"}).code == 0);
  CHECK(slurp(s.root / "a" / "draws.csv") == slurp(s.root / "b" / "draws.csv"));
  CHECK(slurp(s.root / "a" / "selection.json") == slurp(s.root / "b" / "selection.json"));

  REQUIRE(run({"fit", "--seed", "12", "--config", s / "a/config.json", "--out", s / "c"}).code == 0);
  CHECK(io::read_json(s.root / "c" / "config.json").at("seed") == 12);
  CHECK(io::read_json(s.root / "c" / "config.json").at("samples") == 40);

  CHECK(run({"evaluate", "--config", s / "a/config.json"}).code == 1);
  std::ofstream(s.root / "broken.json") << "{ not json";
  CHECK(run({"fit", "--config", s / "broken.json"}).code == 2);
}

TEST_CASE("file formats round-trip byte for byte") {
  Scratch s;
  const fs::path d = design1_dir();
  for (const char* f : {"X.csv", "X_test.csv", "e.csv"}) {
    io::CsvTable t = io::read_csv(d / f);
    io::write_csv(s.root / f, t.header, t.values);
    CHECK(slurp(s.root / f) == slurp(d / f));
  }
  Partition g = io::read_groups_json(d / "groups.json");
  io::write_groups_json(s.root / "groups.json", g);
  CHECK(slurp(s.root / "groups.json") == slurp(d / "groups.json"));

  Rng rng(1);
  BinaryMatrix z(37, 11);
  for (Index i = 0; i < z.rows(); ++i)
    for (Index j = 0; j < z.cols(); ++j) z(i, j) = rng.uniform() < 0.3;
  io::write_draws_bin(s.root / "z.bin", z);
  CHECK(io::read_draws_bin(s.root / "z.bin") == z);
  io::write_draws_bin(s.root / "z2.bin", io::read_draws_bin(s.root / "z.bin"));
  CHECK(slurp(s.root / "z.bin") == slurp(s.root / "z2.bin"));
  io::write_draws_csv(s.root / "z.csv", z);
  CHECK(io::read_draws_csv(s.root / "z.csv") == z);
  io::write_draws_csv(s.root / "z2.csv", io::read_draws_csv(s.root / "z.csv"));
  CHECK(slurp(s.root / "z.csv") == slurp(s.root / "z2.csv"));

  Vector inc = Vector::LinSpaced(5, 0.0, 1.0);
  io::write_inclusion_csv(s.root / "inc.csv", inc);
  io::CsvTable t = io::read_csv(s.root / "inc.csv");
  io::write_csv(s.root / "inc2.csv", t.header, t.values);
  CHECK(slurp(s.root / "inc.csv") == slurp(s.root / "inc2.csv"));

  std::ofstream(s.root / "trunc.bin") << "GSSZ";
  CHECK_THROWS_AS(io::read_draws_bin(s.root / "trunc.bin"), ConsistencyError);
}

TEST_CASE("usage and I/O errors") {
  Scratch s;
  CHECK(run({}).code == 1);
  CHECK(run({"simulate", "--cov", "toeplitz", "--out", s / "x"}).code == 1);
  CHECK(run({"simulate", "--design", "9", "--out", s / "x"}).code == 1);
  CHECK(run({"simulate", "--bogus"}).code == 1);
  CHECK(run({"evaluate", "--mode", "both", "--fit", s / "x"}).code == 1);
  std::ofstream(s.root / "file") << "x";
  CHECK(run({"simulate", "--out", s / "file/sub"}).code == 2);
  Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
  CHECK(run({"fit", "--help"}).out.find("--config") != std::string::npos);
}
