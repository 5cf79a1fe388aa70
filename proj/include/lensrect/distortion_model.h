#ifndef LENSRECT_DISTORTION_MODEL_H_
#define LENSRECT_DISTORTION_MODEL_H_

#include <cmath>
#include <string_view>

namespace lensrect {

// Absolute image coordinates in pixels. Pixel (i, j) has its center at
// (i, j), so an image spans [0, w-1] x [0, h-1].
struct ScreenPoint {
  double x = 0.0;
  double y = 0.0;
};

// Coordinates relative to the distortion center, in pixels.
struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;

  double Radius() const { return std::hypot(x, y); }
  double SquaredRadius() const { return x * x + y * y; }
};

struct DistortionCenter {
  double cx = 0.0;
  double cy = 0.0;

  // ((w-1)/2, (h-1)/2) under the pixel-center-at-integer convention.
  static DistortionCenter ImageCenter(int width, int height) {
    return {0.5 * (width - 1), 0.5 * (height - 1)};
  }
};

// Forward params map undistorted -> distorted radii:
//   r_d = r_u (1 + k1 r_u^2 + k2 r_u^4).
// Inverse params map distorted -> undistorted radii:
//   r_u = r_d (1 + k1' r_d^2 + k2' r_d^4).
enum class ModelDirection { kForward, kInverse };

std::string_view ModelDirectionName(ModelDirection direction);

struct RadialPolyParams {
  double k1 = 0.0;  // pix^-2
  double k2 = 0.0;  // pix^-4
  DistortionCenter center;
  ModelDirection direction = ModelDirection::kInverse;

  static RadialPolyParams Forward(double k1, double k2,
                                  DistortionCenter center) {
    return {k1, k2, center, ModelDirection::kForward};
  }
  static RadialPolyParams Inverse(double k1, double k2,
                                  DistortionCenter center) {
    return {k1, k2, center, ModelDirection::kInverse};
  }

  bool IsIdentity() const { return k1 == 0.0 && k2 == 0.0; }

  // 1 + k1 r^2 + k2 r^4 evaluated from r^2.
  double ScaleFactor(double squared_radius) const {
    return 1.0 + squared_radius * (k1 + k2 * squared_radius);
  }
  double MapRadius(double radius) const {
    return radius * ScaleFactor(radius * radius);
  }
};

// Throws Error(kDirectionMismatch) unless params.direction == expected.
void RequireDirection(const RadialPolyParams& params, ModelDirection expected,
                      std::string_view context);

inline NormalizedPoint Normalize(const ScreenPoint& p,
                                 const DistortionCenter& c) {
  return {p.x - c.cx, p.y - c.cy};
}

inline ScreenPoint Denormalize(const NormalizedPoint& p,
                               const DistortionCenter& c) {
  return {p.x + c.cx, p.y + c.cy};
}

// Applies the polynomial model in whichever direction the params describe:
// the same scale factor multiplies both coordinates.
inline NormalizedPoint MapPoint(const NormalizedPoint& p,
                                const RadialPolyParams& params) {
  const double s = params.ScaleFactor(p.SquaredRadius());
  return {p.x * s, p.y * s};
}

// Radius of the farthest pixel center of a width x height image from the
// given center.
double CornerRadius(int width, int height, const DistortionCenter& center);

}  // namespace lensrect

#endif  // LENSRECT_DISTORTION_MODEL_H_
