#include "lensrect/predicates.h"

#include <cmath>
#include <vector>

namespace lensrect {
namespace {

constexpr double kEpsilon = 0x1p-53;
constexpr double kOrientBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
constexpr double kInCircleBound = (10.0 + 96.0 * kEpsilon) * kEpsilon;

// A nonoverlapping expansion: components sorted by increasing magnitude,
// zeros removed. The represented value is the exact sum of the components.
using Expansion = std::vector<double>;

inline void TwoSum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void TwoProduct(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

Expansion Difference(double a, double b) {
  const double x = a - b;
  const double bv = a - x;
  const double av = x + bv;
  const double y = (a - av) + (bv - b);
  Expansion e;
  if (y != 0.0) e.push_back(y);
  if (x != 0.0) e.push_back(x);
  return e;
}

Expansion Grow(const Expansion& e, double b) {
  Expansion h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double sum, err;
    TwoSum(q, ei, sum, err);
    q = sum;
    if (err != 0.0) h.push_back(err);
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  if (h.size() == 1 && h[0] == 0.0) h.clear();
  return h;
}

Expansion Add(const Expansion& e, const Expansion& f) {
  Expansion h = e;
  for (double fi : f) h = Grow(h, fi);
  return h;
}

Expansion Negate(Expansion e) {
  for (double& v : e) v = -v;
  return e;
}

// Scales an expansion by a single double.
Expansion Scale(const Expansion& e, double b) {
  Expansion h;
  if (e.empty() || b == 0.0) return h;
  h.reserve(2 * e.size());
  double q, hh;
  TwoProduct(e[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (size_t i = 1; i < e.size(); ++i) {
    double p1, p0;
    TwoProduct(e[i], b, p1, p0);
    double sum, err;
    TwoSum(q, p0, sum, err);
    if (err != 0.0) h.push_back(err);
    double s2, e2;
    TwoSum(p1, sum, s2, e2);
    // Fast-Two-Sum is valid here since |p1| >= |sum|.
    q = s2;
    if (e2 != 0.0) h.push_back(e2);
  }
  if (q != 0.0) h.push_back(q);
  return h;
}

Expansion Multiply(const Expansion& e, const Expansion& f) {
  Expansion h;
  for (double fi : f) h = Add(h, Scale(e, fi));
  return h;
}

inline double Estimate(const Expansion& e) {
  return e.empty() ? 0.0 : e.back();
}

double Orient2dExact(const Point2& a, const Point2& b, const Point2& c) {
  const Expansion acx = Difference(a.x, c.x);
  const Expansion acy = Difference(a.y, c.y);
  const Expansion bcx = Difference(b.x, c.x);
  const Expansion bcy = Difference(b.y, c.y);
  const Expansion det =
      Add(Multiply(acx, bcy), Negate(Multiply(acy, bcx)));
  return Estimate(det);
}

double InCircleExact(const Point2& a, const Point2& b, const Point2& c,
                     const Point2& d) {
  const Expansion adx = Difference(a.x, d.x), ady = Difference(a.y, d.y);
  const Expansion bdx = Difference(b.x, d.x), bdy = Difference(b.y, d.y);
  const Expansion cdx = Difference(c.x, d.x), cdy = Difference(c.y, d.y);

  const Expansion alift = Add(Multiply(adx, adx), Multiply(ady, ady));
  const Expansion blift = Add(Multiply(bdx, bdx), Multiply(bdy, bdy));
  const Expansion clift = Add(Multiply(cdx, cdx), Multiply(cdy, cdy));

  const Expansion bc = Add(Multiply(bdx, cdy), Negate(Multiply(cdx, bdy)));
  const Expansion ca = Add(Multiply(cdx, ady), Negate(Multiply(adx, cdy)));
  const Expansion ab = Add(Multiply(adx, bdy), Negate(Multiply(bdx, ady)));

  const Expansion det =
      Add(Add(Multiply(alift, bc), Multiply(blift, ca)), Multiply(clift, ab));
  return Estimate(det);
}

}  // namespace

double Orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double detsum = std::abs(left) + std::abs(right);
  if (std::abs(det) > kOrientBound * detsum) return det;
  return Orient2dExact(a, b, c);
}

double InCircle(const Point2& a, const Point2& b, const Point2& c,
                const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double alift = adx * adx + ady * ady;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double blift = bdx * bdx + bdy * bdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent =
      (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
      (std::abs(cdxady) + std::abs(adxcdy)) * blift +
      (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  if (std::abs(det) > kInCircleBound * permanent) return det;
  return InCircleExact(a, b, c, d);
}

}  // namespace lensrect
