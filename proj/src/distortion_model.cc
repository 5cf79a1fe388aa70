#include "lensrect/distortion_model.h"

#include <algorithm>
#include <string>

#include "lensrect/error.h"

namespace lensrect {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDirectionMismatch: return "direction mismatch";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kDegenerateDerivative: return "degenerate derivative";
    case ErrorCode::kFitDegenerate: return "fit degenerate";
    case ErrorCode::kDenominatorSign: return "denominator sign";
    case ErrorCode::kDegenerateInput: return "degenerate input";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kEmptyRegion: return "empty region";
    case ErrorCode::kCorruptMap: return "corrupt map";
    case ErrorCode::kIo: return "i/o";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kInvalidArgument: return "invalid argument";
  }
  return "unknown";
}

std::string_view ModelDirectionName(ModelDirection direction) {
  return direction == ModelDirection::kForward ? "forward" : "inverse";
}

void RequireDirection(const RadialPolyParams& params, ModelDirection expected,
                      std::string_view context) {
  if (params.direction != expected) {
    throw Error(ErrorCode::kDirectionMismatch,
                std::string(context) + " requires " +
                    std::string(ModelDirectionName(expected)) +
                    " distortion parameters, got " +
                    std::string(ModelDirectionName(params.direction)));
  }
}

double CornerRadius(int width, int height, const DistortionCenter& center) {
  const double dx = std::max(std::abs(center.cx),
                             std::abs(width - 1 - center.cx));
  const double dy = std::max(std::abs(center.cy),
                             std::abs(height - 1 - center.cy));
  return std::hypot(dx, dy);
}

}  // namespace lensrect
