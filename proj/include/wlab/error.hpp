#pragma once

#include <stdexcept>
#include <string>

namespace wlab {

// Error codes shared with the C API (keep in sync with wlab.h).
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  io_error = 2,
  degenerate_metric = 3,
  not_conformal = 4,
  quadrature_under_resolved = 5,
  out_of_range = 6,
  pole_hit = 7,
  center_on_surface = 8,
  non_convergent = 9,
  ambiguous_order = 10,
  zero_order = 11,
  cycle_detected = 12,
  mismatch = 13,
  not_double_tree = 14,
  no_isomorphism = 15,
  inconsistent_behavior = 16,
  overlap_collision = 17,
  unresolved = 18,
  inconsistent_across_k = 19,
  ic_center_misclassified = 20,
  internal = 21,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace wlab
