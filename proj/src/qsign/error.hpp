#pragma once

#include <stdexcept>
#include <string>

namespace qsign {

enum class ErrorCode {
  contract_violation,
  not_found,
  too_large,
  unauthorized,
  parse,
  io,
  internal,
};

// Thrown by every module; the C API and HTTP layer map `code()` to their own
// status spaces.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void contract_violation(const std::string& what) {
  throw Error(ErrorCode::contract_violation, what);
}

}  // namespace qsign
