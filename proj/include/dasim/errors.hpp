#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dasim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input structure: missing columns, bad JSON shape, unknown keys.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A single CSV row could not be ingested.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structural invariant violations. Carries every issue found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed";
    for (const auto& i : issues) out += "\n  - " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Too many traces could not be replayed on the process model.
class ReplayError : public Error {
 public:
  using Error::Error;
};

/// Simulation ran out of events while cases still held live tokens.
class DeadlockError : public Error {
 public:
  DeadlockError(std::string case_id, std::string node_id)
      : Error("deadlock: case " + case_id + " stuck at node " + node_id),
        case_id_(std::move(case_id)),
        node_id_(std::move(node_id)) {}
  const std::string& case_id() const noexcept { return case_id_; }
  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string case_id_;
  std::string node_id_;
};

}  // namespace dasim
