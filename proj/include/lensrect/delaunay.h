#ifndef LENSRECT_DELAUNAY_H_
#define LENSRECT_DELAUNAY_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lensrect/predicates.h"

namespace lensrect {

inline constexpr int kNoNeighbor = -1;

// Delaunay triangulation of a planar point set.
//
// vertices[i] was produced by input point source_index[i]; input points
// closer than kDuplicateDistance to an earlier one are dropped. Triangles are
// counter-clockwise vertex triples. neighbors[t][i] is the triangle across
// the edge opposite triangles[t][i], or kNoNeighbor on the convex hull.
struct Triangulation {
  static constexpr double kDuplicateDistance = 1e-9;

  std::vector<Point2> vertices;
  std::vector<std::uint32_t> source_index;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 3>> neighbors;

  std::size_t size() const { return triangles.size(); }
};

// Throws Error(kDegenerateInput) if fewer than 3 distinct points remain or
// all of them are collinear. Deterministic for a given input order.
Triangulation Triangulate(std::span<const Point2> points);

struct BarycentricCoords {
  int triangle = kNoNeighbor;
  // Non-negative, summing to 1, ordered like triangles[triangle].
  std::array<double, 3> weights{};
};

// Walks from `hint` (any triangle index; out of range means "start
// anywhere") to the triangle containing q. Points on the hull boundary are
// inside. Returns nullopt when q is outside the convex hull.
std::optional<BarycentricCoords> Locate(const Triangulation& t,
                                        const Point2& q, int hint = 0);

// Piecewise-linear interpolation of per-vertex values (indexed like
// t.vertices). Returns nullopt outside the hull. When `hint` is non-null it
// is used as the walk start and updated with the containing triangle.
std::optional<double> Interpolate(const Triangulation& t,
                                  std::span<const double> values,
                                  const Point2& q, int* hint = nullptr);

}  // namespace lensrect

#endif  // LENSRECT_DELAUNAY_H_
