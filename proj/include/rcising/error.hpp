#pragma once

#include <stdexcept>
#include <string>

namespace rci {

enum class ErrorCode {
  size = 1,
  condition,
  precision,
  domain,
  host,
  budget,
  insufficient_data,
  ergodicity,
  config,
  io,
  missing_input,
  invalid_argument,
};

/// Base exception for every failure raised by the library. The code is what
/// the C API reports back across the shared-library boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rci
