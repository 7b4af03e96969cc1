#pragma once

#include <stdexcept>
#include <string>

namespace nsgld {

// Error categories; the C API and the CLI map these onto status/exit codes.
enum class ErrorCode {
  invalid_argument,   // bad parameter, precondition violated
  config,             // malformed or inconsistent configuration / input file
  io,                 // file could not be read or written
  numeric,            // eigensolver non-convergence, overflow, degenerate state
  saddle_structure,   // Hessian does not have the one-negative-eigenvalue shape
  all_diverged,       // every chain in an ensemble diverged
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nsgld
