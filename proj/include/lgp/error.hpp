#pragma once

#include <stdexcept>
#include <string>

namespace lgp {

enum class ErrorCode {
  invalid_input,
  outside_annulus,
  decomposition_ambiguous,
  mass_mismatch,
  missing_anchor,
  empty_measure,
  level_mismatch,
  uncovered_cell,
  config,
  internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lgp
