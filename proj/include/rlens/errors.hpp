#pragma once

#include <stdexcept>
#include <string>

namespace rlens {

// Bad arguments or violated preconditions.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed input file; message carries the line number when known.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid file with out-of-contract content (NaN, missing rows).
struct ValidationError : ParseError {
  using ParseError::ParseError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Child-process reward bridge failure; carries the offending raw line, if any.
struct BridgeError : std::runtime_error {
  BridgeError(const std::string& message, std::string line = "")
      : std::runtime_error(line.empty() ? message : message + " [line: " + line + "]"),
        raw_line(std::move(line)) {}
  std::string raw_line;
};

// Optimization produced a non-finite cost or gradient.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& message, int at_step)
      : std::runtime_error(message + " at step " + std::to_string(at_step)), step(at_step) {}
  int step;
};

// Iterative solver failed to converge within its cap.
struct DiagnosticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rlens
