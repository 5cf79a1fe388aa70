#include "lensrect/predicates.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace lensrect {
namespace {

int Sign(double v) { return (v > 0) - (v < 0); }

TEST(OracleTest, RationalConversionIsExact) {
  const oracle::Rational tenth(0.1);
  EXPECT_NE(tenth * 10, oracle::Rational(1));
}

TEST(Orient2dTest, BasicOrientation) {
  EXPECT_GT(Orient2d({0, 0}, {1, 0}, {0, 1}), 0);
  EXPECT_LT(Orient2d({0, 0}, {0, 1}, {1, 0}), 0);
  EXPECT_EQ(Orient2d({0, 0}, {1, 1}, {2, 2}), 0);
  // Not collinear once rounded to doubles; the sign must follow the exact
  // value rather than the decimal intuition.
  EXPECT_EQ(Sign(Orient2d({0.1, 0.2}, {0.3, 0.6}, {0.5, 1.0})),
            oracle::ExactOrient({0.1, 0.2}, {0.3, 0.6}, {0.5, 1.0}));
}

TEST(Orient2dTest, NearlyCollinearMatchesExactSign) {
  // The classic stress case: points on a line through (12, 12) and (24, 24)
  // perturbed by a few ulps, where naive evaluation gets the sign wrong.
  const Point2 b{12.0, 12.0};
  const Point2 c{24.0, 24.0};
  const double ulp = std::numeric_limits<double>::epsilon() / 2;
  int checked = 0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const Point2 a{0.5 + i * ulp, 0.5 + j * ulp};
      EXPECT_EQ(Sign(Orient2d(a, b, c)), oracle::ExactOrient(a, b, c))
          << i << "," << j;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 4096);
}

TEST(Orient2dTest, RandomNearDegenerateMatchesExactSign) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  std::uniform_int_distribution<int> steps(-8, 8);
  for (int i = 0; i < 20000; ++i) {
    const Point2 a{u(rng), u(rng)};
    const Point2 b{u(rng), u(rng)};
    const double t = std::uniform_real_distribution<double>(-2, 3)(rng);
    Point2 c{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    for (int k = steps(rng); k != 0; k += (k > 0 ? -1 : 1)) {
      c.x = std::nextafter(c.x, k > 0 ? INFINITY : -INFINITY);
    }
    EXPECT_EQ(Sign(Orient2d(a, b, c)), oracle::ExactOrient(a, b, c));
  }
}

TEST(InCircleTest, BasicCases) {
  const Point2 a{0, 0}, b{1, 0}, c{0, 1};
  EXPECT_GT(InCircle(a, b, c, {0.5, 0.5}), 0);
  EXPECT_LT(InCircle(a, b, c, {2, 2}), 0);
  EXPECT_EQ(InCircle(a, b, c, {1, 1}), 0);  // cocircular
}

TEST(InCircleTest, NearlyCocircularMatchesExactSign) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_int_distribution<int> steps(-4, 4);
  int disagreements = 0;
  for (int i = 0; i < 20000; ++i) {
    const double cx = u(rng), cy = u(rng), r = std::abs(u(rng)) + 1.0;
    Point2 p[4];
    for (auto& q : p) {
      const double t = angle(rng);
      q = {cx + r * std::cos(t), cy + r * std::sin(t)};
    }
    for (int k = steps(rng); k != 0; k += (k > 0 ? -1 : 1)) {
      p[3].y = std::nextafter(p[3].y, k > 0 ? INFINITY : -INFINITY);
    }
    if (oracle::ExactOrient(p[0], p[1], p[2]) < 0) std::swap(p[1], p[2]);
    disagreements += Sign(InCircle(p[0], p[1], p[2], p[3])) !=
                     oracle::ExactInCircle(p[0], p[1], p[2], p[3]);
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(InCircleTest, LatticeCocircularPointsAreExactlyZero) {
  // Points of an integer lattice mapped by a large offset stay exactly
  // cocircular in floating point.
  const double off = 1e6;
  const Point2 a{off + 0, off + 0}, b{off + 3, off + 0}, c{off + 3, off + 4};
  EXPECT_EQ(InCircle(a, b, c, {off + 0, off + 4}), 0.0);
  EXPECT_GT(InCircle(a, b, c, {off + 1, off + 2}), 0.0);
}

}  // namespace
}  // namespace lensrect
