#ifndef LENSRECT_ERROR_H_
#define LENSRECT_ERROR_H_

#include <stdexcept>
#include <string>

namespace lensrect {

enum class ErrorCode {
  kDirectionMismatch,
  kDivergence,
  kDegenerateDerivative,
  kFitDegenerate,
  kDenominatorSign,
  kDegenerateInput,
  kDimensionMismatch,
  kEmptyRegion,
  kCorruptMap,
  kIo,
  kUnsupportedFormat,
  kInvalidArgument,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type; the code
// lets callers (and tests) distinguish the failure classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lensrect

#endif  // LENSRECT_ERROR_H_
