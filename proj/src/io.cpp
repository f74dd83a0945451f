#include "gss/io.hpp"

#include "gss/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gss::io {

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw ConsistencyError("missing file: " + path.string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const fs::path& path, std::size_t line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConsistencyError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw ConsistencyError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConsistencyError(path.string() + ": empty file");
  t.header = split_line(line);
  std::vector<double> data;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw ConsistencyError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " fields, got " +
                             std::to_string(cells.size()));
    }
    for (const auto& c : cells) data.push_back(parse_real(c, path, lineno));
    ++rows;
  }
  const auto cols = static_cast<Index>(t.header.size());
  t.values.resize(static_cast<Index>(rows), cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c)
      t.values(static_cast<Index>(i), c) = data[i * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  return t;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<Index>(header.size()) != values.cols()) {
    throw UsageError("write_csv: header/column count mismatch");
  }
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_real(values(i, c));
    out << '\n';
  }
}

Matrix read_design_csv(const fs::path& path) { return read_csv(path).values; }

void write_design_csv(const fs::path& path, const Matrix& x) {
  std::vector<std::string> header;
  for (Index c = 0; c < x.cols(); ++c) header.push_back("col_" + std::to_string(c + 1));
  write_csv(path, header, x);
}

Binary read_response_csv(const fs::path& path) {
  CsvTable t = read_csv(path);
  if (t.values.cols() != 1) throw ConsistencyError(path.string() + ": expected a single column");
  Binary e(t.values.rows());
  for (Index i = 0; i < e.size(); ++i) {
    double v = t.values(i, 0);
    if (v != 0.0 && v != 1.0) {
      throw ConsistencyError(path.string() + ": row " + std::to_string(i + 1) + " is not 0/1");
    }
    e(i) = static_cast<int>(v);
  }
  return e;
}

void write_response_csv(const fs::path& path, const Binary& e) {
  auto out = open_out(path);
  out << "e\n";
  for (Index i = 0; i < e.size(); ++i) out << e(i) << '\n';
}

Partition read_groups_json(const fs::path& path) {
  json j = read_json(path);
  if (!j.is_array()) throw ConsistencyError(path.string() + ": expected an array of index arrays");
  Partition groups;
  for (const auto& g : j) {
    if (!g.is_array()) throw ConsistencyError(path.string() + ": group entry is not an array");
    std::vector<Index> cols;
    for (const auto& c : g) cols.push_back(c.get<Index>() - 1);
    groups.push_back(std::move(cols));
  }
  return groups;
}

void write_groups_json(const fs::path& path, const Partition& groups) {
  json j = json::array();
  for (const auto& g : groups) {
    json a = json::array();
    for (Index c : g) a.push_back(c + 1);
    j.push_back(std::move(a));
  }
  write_json(path, j);
}

void write_draws_csv(const fs::path& path, const BinaryMatrix& z) {
  auto out = open_out(path);
  for (Index c = 0; c < z.cols(); ++c) out << (c ? "," : "") << "g_" << (c + 1);
  out << '\n';
  std::string row;
  for (Index i = 0; i < z.rows(); ++i) {
    row.clear();
    for (Index c = 0; c < z.cols(); ++c) {
      if (c) row += ',';
      row += z(i, c) ? '1' : '0';
    }
    out << row << '\n';
  }
}

BinaryMatrix read_draws_csv(const fs::path& path) {
  return read_csv(path).values.cast<int>();
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in.get())) << (8 * b);
  return v;
}

}  // namespace

void write_draws_bin(const fs::path& path, const BinaryMatrix& z) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write("GSSZ", 4);
  const std::uint32_t version = 1;
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((version >> (8 * b)) & 0xFF));
  put_u64(out, static_cast<std::uint64_t>(z.rows()));
  put_u64(out, static_cast<std::uint64_t>(z.cols()));
  const std::size_t bits = static_cast<std::size_t>(z.rows() * z.cols());
  std::vector<unsigned char> packed((bits + 7) / 8, 0);
  std::size_t k = 0;
  for (Index i = 0; i < z.rows(); ++i)
    for (Index c = 0; c < z.cols(); ++c, ++k)
      if (z(i, c)) packed[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
  out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

BinaryMatrix read_draws_bin(const fs::path& path) {
  require_file(path);
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GSSZ", 4) != 0) throw ConsistencyError(path.string() + ": bad magic");
  std::uint32_t version = 0;
  for (int b = 0; b < 4; ++b) version |= static_cast<std::uint32_t>(static_cast<unsigned char>(in.get())) << (8 * b);
  if (version != 1) throw ConsistencyError(path.string() + ": unsupported version");
  auto rows = static_cast<Index>(get_u64(in));
  auto cols = static_cast<Index>(get_u64(in));
  const std::size_t bits = static_cast<std::size_t>(rows * cols);
  std::vector<unsigned char> packed((bits + 7) / 8);
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!in) throw ConsistencyError(path.string() + ": truncated");
  BinaryMatrix z(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c, ++k) z(i, c) = (packed[k / 8] >> (k % 8)) & 1u;
  return z;
}

void write_inclusion_csv(const fs::path& path, const Vector& inclusion) {
  auto out = open_out(path);
  out << "group_id,probability\n";
  for (Index j = 0; j < inclusion.size(); ++j) out << (j + 1) << ',' << format_real(inclusion(j)) << '\n';
}

void write_roc_csv(const fs::path& path, const RocCurve& roc) {
  auto out = open_out(path);
  out << "threshold,fpr,tpr\n";
  for (Index k = 0; k < roc.thresholds.size(); ++k) {
    out << format_real(roc.thresholds(k)) << ',' << format_real(roc.fpr(k)) << ','
        << format_real(roc.tpr(k)) << '\n';
  }
}

json to_json(const GroupSet& model) {
  json a = json::array();
  for (int j : model) a.push_back(j + 1);
  return a;
}

GroupSet group_set_from_json(const json& j, int r) {
  GroupSet s;
  for (const auto& v : j) {
    int g = v.get<int>() - 1;
    if (g < 0 || g >= r) throw ConsistencyError("group index " + std::to_string(g + 1) + " out of range");
    s.push_back(g);
  }
  std::sort(s.begin(), s.end());
  return s;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

json to_json(const MetricSet& m) {
  return json{{"sensitivity", m.sensitivity}, {"specificity", m.specificity}, {"mcc", m.mcc},
              {"mspe", m.mspe},               {"n_errors", m.n_errors},       {"tp", m.tp},
              {"tn", m.tn},                   {"fp", m.fp},                   {"fn", m.fn}};
}

json to_json(const Hyperparams& h) {
  json j{{"tau2", h.tau2}, {"q", h.q}, {"nu", h.nu}, {"sigma02", h.sigma02}, {"alpha0", h.alpha0}};
  j["max_model_groups"] = h.max_model_groups ? json(*h.max_model_groups) : json(nullptr);
  return j;
}

json to_json(const ConditionReport& c) {
  return json{{"m_n", c.m_n},
              {"lambda_hat", c.lambda_hat},
              {"Lambda_hat", c.Lambda_hat},
              {"beta_min_lhs", c.beta_min_lhs},
              {"beta_min_rhs", c.beta_min_rhs},
              {"c0_ratio", c.c0_ratio},
              {"true_size", c.true_size},
              {"true_size_within_mn", c.true_size_within_mn},
              {"tau2_rule_ok", c.tau2_rule_ok},
              {"q_rule_ok", c.q_rule_ok},
              {"d", c.d},
              {"d_prime", c.d_prime},
              {"n_probe", c.n_probe},
              {"estimates", "lambda_hat and Lambda_hat are sampled over random models"}};
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConsistencyError(path.string() + ": " + e.what());
  }
}

}  // namespace gss::io
