#pragma once

#include <stdexcept>
#include <string>

namespace skqd {

// Invalid model/run parameters or malformed configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A requested computation exceeds the memory/size budget. Carries the
// estimate so callers can report what would have been needed. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
public:
  InfeasibleError(const std::string& what, std::size_t required_bytes)
      : std::runtime_error(what), required_bytes(required_bytes) {}
  std::size_t required_bytes;
};

// Eigensolver failed to reach the requested residual. CLI exit code 4.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

// Malformed input file. Carries the 1-based line number. CLI exit code 5.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line(line) {}
  int line;
};

}  // namespace skqd
