#include "gasg/errors.hpp"

namespace gasg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::underdetermined: return "Underdetermined";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::degenerate_gradient: return "DegenerateGradient";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::invalid_shape: return "InvalidShape";
    case ErrorCode::all_columns_unusable: return "AllColumnsUnusable";
    case ErrorCode::too_few_columns: return "TooFewColumns";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::zero_denominator: return "ZeroDenominator";
    case ErrorCode::empty_inliers: return "EmptyInliers";
    case ErrorCode::io: return "IOError";
    case ErrorCode::parse: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace gasg
