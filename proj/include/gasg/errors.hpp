#pragma once

#include <stdexcept>
#include <string>

namespace gasg {

enum class ErrorCode {
  zero_vector,
  index_out_of_range,
  underdetermined,
  rank_deficient,
  degenerate_gradient,
  shape_mismatch,
  invalid_shape,
  all_columns_unusable,
  too_few_columns,
  invalid_spec,
  zero_denominator,
  empty_inliers,
  io,
  parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gasg
