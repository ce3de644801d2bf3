// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bsm {

enum class ErrorCode {
  invalid_input = 1,
  unsupported_shape = 2,
  undefined_metric = 3,
  training_divergence = 4,
  parse_error = 5,
  io_error = 6,
};

/// Every failure raised by the library carries one of the codes above so the
/// C layer can map it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_input, what);
}

}  // namespace bsm
