#pragma once

#include <stdexcept>
#include <string>

namespace maniprim {

// Process exit codes used by the CLI. Library errors carry one of these.
enum class ErrorCode : int {
  usage = 2,
  data = 3,
  numeric = 4,
};

inline const char* code_tag(ErrorCode c) {
  switch (c) {
    case ErrorCode::usage: return "E_USAGE";
    case ErrorCode::data: return "E_DATA";
    case ErrorCode::numeric: return "E_NUMERIC";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Bad argument to an operation (rate <= 0, even window, ...).
struct ArgumentError : Error {
  explicit ArgumentError(const std::string& w) : Error(ErrorCode::usage, w) {}
};

// Input file does not follow its schema (missing column, bad header).
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(ErrorCode::data, w) {}
};

// Timestamps not strictly increasing.
struct OrderingError : Error {
  OrderingError(const std::string& w, std::size_t row)
      : Error(ErrorCode::data, w), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Non-finite or out-of-domain value in input data.
struct ValueError : Error {
  ValueError(const std::string& w, std::size_t row = 0, std::string column = {})
      : Error(ErrorCode::data, w), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Profile table or other model input rejected by validation.
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCode::data, w) {}
};

// Operation called on an object that is not ready (e.g. incomplete bank).
struct StateError : Error {
  explicit StateError(const std::string& w) : Error(ErrorCode::data, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::data, w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::numeric, w) {}
};

}  // namespace maniprim
