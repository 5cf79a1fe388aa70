#ifndef LENSRECT_INVERSE_APPROXIMATION_H_
#define LENSRECT_INVERSE_APPROXIMATION_H_

#include <array>
#include <vector>

#include "lensrect/distortion_model.h"

namespace lensrect {

// Approximating the forward (undistorted -> distorted) mapping when only the
// inverse polynomial model is known.

enum class NewtonMode { kSingleIteration, kToConvergence };

struct NewtonConfig {
  int max_iterations = 20;
  double tolerance = 1e-8;  // |f(r_d)| in pixels
  NewtonMode mode = NewtonMode::kToConvergence;
};

enum class NewtonStatus { kConverged, kDiverged, kDegenerateDerivative };

struct NewtonResult {
  double radius = 0.0;
  int iterations = 0;
  // |f(radius)| at the returned iterate.
  double residual = 0.0;
  NewtonStatus status = NewtonStatus::kConverged;
};

// Solves r_d + k1' r_d^3 + k2' r_d^5 - r_u = 0 starting from r_d = r_u.
// Never throws; the status reports divergence or a vanishing derivative.
// SingleIteration mode always reports kConverged unless the derivative
// vanishes.
NewtonResult TryNewtonInvertRadius(double undistorted_radius,
                                   const RadialPolyParams& inverse,
                                   const NewtonConfig& config);

// Throwing variant: kDivergence / kDegenerateDerivative / kDirectionMismatch.
NewtonResult NewtonInvertRadius(double undistorted_radius,
                                const RadialPolyParams& inverse,
                                const NewtonConfig& config);

// Maps an undistorted point to its distorted position along the same ray.
NormalizedPoint NewtonMapPoint(const NormalizedPoint& undistorted,
                               const RadialPolyParams& inverse,
                               const NewtonConfig& config);

// p_out = p - p (a1 r^2 + a2 r^4 + a3 r^6 + a4 r^8) / (1 + 4 a5 r^2 + 6 a6 r^4)
// Here fitted so that p is an undistorted point and p_out its distorted
// position.
struct RationalInverseParams {
  // a1 [pix^-2], a2 [pix^-4], a3 [pix^-6], a4 [pix^-8], a5 [pix^-2],
  // a6 [pix^-4].
  std::array<double, 6> alpha{};
  DistortionCenter center;

  double Denominator(double squared_radius) const {
    return 1.0 + squared_radius * (4.0 * alpha[4] +
                                   6.0 * alpha[5] * squared_radius);
  }
  double Numerator(double squared_radius) const {
    const double s = squared_radius;
    return s * (alpha[0] + s * (alpha[1] + s * (alpha[2] + s * alpha[3])));
  }
};

// Throws Error(kDenominatorSign) when the denominator is not positive at p.
NormalizedPoint RationalMapPoint(const NormalizedPoint& p,
                                 const RationalInverseParams& params);

struct RationalFitConfig {
  int stride = 1;
  // Damped Gauss-Newton steps on the true rational residual after the
  // closed-form linearized solve. Zero disables refinement.
  int refinement_iterations = 10;
  double relative_change_tolerance = 1e-10;
};

struct RationalFit {
  RationalInverseParams params;
  // sqrt(mean over samples of |predicted - actual|^2), pixels.
  double rms_residual = 0.0;
  // RMS after the linear solve and after each accepted refinement step.
  std::vector<double> residual_history;
  int sample_count = 0;
  double max_radius = 0.0;  // largest undistorted sample radius
};

// Samples every stride-th distorted pixel of a width x height image, maps it
// through the inverse model and fits the rational model predicting the
// distorted position from the undistorted one.
// Errors: kFitDegenerate (singular system), kDenominatorSign (denominator not
// positive on [0, max_radius]), kInvalidArgument, kDirectionMismatch.
RationalFit FitRationalInverse(const RadialPolyParams& inverse, int width,
                               int height, const RationalFitConfig& config);

// True when 1 + 4 a5 s + 6 a6 s^2 > 0 for every s = r^2 in [0, max_radius^2].
bool DenominatorPositiveOn(const RationalInverseParams& params,
                           double max_radius);

}  // namespace lensrect

#endif  // LENSRECT_INVERSE_APPROXIMATION_H_
