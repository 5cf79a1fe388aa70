#ifndef LENSRECT_PREDICATES_H_
#define LENSRECT_PREDICATES_H_

namespace lensrect {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Orientation and in-circle tests whose signs are exact for any finite
// double inputs. A floating-point filter decides the easy cases; the rest
// are evaluated with exact expansion arithmetic. Only the sign of the
// returned value is meaningful when the filter fails.

// > 0 if a, b, c are in counter-clockwise order, < 0 if clockwise, 0 if
// collinear.
double Orient2d(const Point2& a, const Point2& b, const Point2& c);

// > 0 if d lies strictly inside the circle through a, b, c (which must be in
// counter-clockwise order), < 0 if outside, 0 if cocircular.
double InCircle(const Point2& a, const Point2& b, const Point2& c,
                const Point2& d);

}  // namespace lensrect

#endif  // LENSRECT_PREDICATES_H_
