#pragma once

#include "gss/core.hpp"
#include "gss/inference.hpp"
#include "gss/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

// On-disk formats. CSV for tables, JSON for metadata. Group indices are
// 1-based on disk and 0-based in memory. Reals are written with 17
// significant digits so write -> read -> write is byte-identical.
namespace gss::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& values);

// X.csv: header col_1..col_p.
Matrix read_design_csv(const fs::path& path);
void write_design_csv(const fs::path& path, const Matrix& x);

// e.csv: single column "e" of 0/1.
Binary read_response_csv(const fs::path& path);
void write_response_csv(const fs::path& path, const Binary& e);

// groups.json: [[1,2,3],[4,5],...]
Partition read_groups_json(const fs::path& path);
void write_groups_json(const fs::path& path, const Partition& groups);

// draws.csv (header g_1..g_r) or draws.bin. The binary layout is the magic
// "GSSZ", a little-endian u32 version (1), u64 rows, u64 cols, then the
// indicators bit-packed row-major, LSB first.
void write_draws_csv(const fs::path& path, const BinaryMatrix& z);
BinaryMatrix read_draws_csv(const fs::path& path);
void write_draws_bin(const fs::path& path, const BinaryMatrix& z);
BinaryMatrix read_draws_bin(const fs::path& path);

// inclusion.csv: group_id,probability
void write_inclusion_csv(const fs::path& path, const Vector& inclusion);

// roc.csv: threshold,fpr,tpr
void write_roc_csv(const fs::path& path, const RocCurve& roc);

json to_json(const GroupSet& model);  // 1-based
GroupSet group_set_from_json(const json& j, int r);
json to_json(const Vector& v);
Vector vector_from_json(const json& j);
json to_json(const MetricSet& m);
json to_json(const Hyperparams& h);
json to_json(const ConditionReport& c);

void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

// Throws ConsistencyError naming the file when it does not exist.
void require_file(const fs::path& path);

}  // namespace gss::io
