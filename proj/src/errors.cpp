#include "l2n2/errors.hpp"

namespace l2n2 {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidData: return "invalid-data";
    case ErrorCode::DegenerateRatio: return "degenerate-ratio";
    case ErrorCode::EmptyStatistic: return "empty-statistic";
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::FormatError: return "format-error";
    case ErrorCode::NoCalibration: return "no-calibration";
    case ErrorCode::NotImplemented: return "not-implemented";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace l2n2
