#pragma once

#include <stdexcept>
#include <string>

namespace gss {

// Exit codes used by the command-line front end.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad caller input: violated preconditions, unknown enum names.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

// Group partition is not a partition of the columns.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DegenerateColumnError : public Error {
 public:
  DegenerateColumnError(const std::string& what, long column)
      : Error(ErrorKind::data, what), column_(column) {}
  long column() const noexcept { return column_; }

 private:
  long column_;
};

// Inputs disagree with each other (dimensions, missing files, missing truth).
class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double min_pivot)
      : Error(ErrorKind::numerical, what), min_pivot_(min_pivot) {}
  double min_pivot() const noexcept { return min_pivot_; }

 private:
  double min_pivot_;
};

// Raised by the samplers; carries the sweep at which the failure happened.
class SamplerError : public Error {
 public:
  SamplerError(const std::string& what, long iteration)
      : Error(ErrorKind::numerical, what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace gss
