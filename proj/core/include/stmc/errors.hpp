#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad parameter, bad pattern, invalid grid cell.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be used: malformed records in strict mode,
/// unknown CSV layouts, rank-deficient designs.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed record in an input stream, positioned by line number.
class FormatError : public DataError {
 public:
  FormatError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// A non-fatal problem found while reading or processing data.
struct Diagnostic {
  std::string source;
  std::size_t line = 0;  // 0 when not tied to a line
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// Lenient-mode warnings collected by a processing step.
struct Report {
  std::vector<Diagnostic> warnings;

  void warn(std::string source, std::size_t line, std::string message) {
    warnings.push_back({std::move(source), line, std::move(message)});
  }
  bool empty() const { return warnings.empty(); }
  std::size_t size() const { return warnings.size(); }
  void append(const Report& other) {
    warnings.insert(warnings.end(), other.warnings.begin(),
                    other.warnings.end());
  }
};

}  // namespace stmc
