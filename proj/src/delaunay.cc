#include "lensrect/delaunay.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_map>

#include "lensrect/error.h"

namespace lensrect {
namespace {

// Vertex id of the symbolic point at infinity. A "ghost" triangle (a, b,
// kInfinite) sits outside hull edge a->b; its conflict region is the open
// half-plane left of a->b plus the open segment ab. Using it in place of a
// finite super-triangle keeps the final hull exactly convex.
constexpr int kInfinite = -1;

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> n;
  bool IsGhost() const { return v[2] == kInfinite; }
};

// Hilbert index of (x, y) on a 2^16 x 2^16 grid.
std::uint64_t HilbertIndex(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t kSide = 1u << 16;
  std::uint64_t d = 0;
  for (std::uint32_t s = kSide / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += std::uint64_t(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = kSide - 1 - x;
        y = kSide - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

// Biased randomized insertion order: points are dealt into rounds of
// geometrically growing size with a fixed seed, and each round is Hilbert
// sorted. Early sparse rounds build a coarse hull so later points land in
// small cavities even on exactly collinear grids.
std::vector<int> InsertionOrder(const std::vector<Point2>& pts) {
  const int n = static_cast<int>(pts.size());
  double min_x = pts[0].x, max_x = pts[0].x;
  double min_y = pts[0].y, max_y = pts[0].y;
  for (const Point2& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-300});
  const double cell = 65535.0 / extent;

  std::mt19937_64 rng(0x5eed5eedULL);
  std::vector<std::pair<std::uint64_t, int>> keyed(n);
  std::vector<int> round(n);
  int rounds = 1;
  while ((n >> rounds) > 64) ++rounds;
  for (int i = 0; i < n; ++i) {
    int r = rounds - 1;
    std::uint64_t bits = rng();
    while (r > 0 && (bits & 1)) {
      --r;
      bits >>= 1;
    }
    round[i] = r;
    const auto hx = static_cast<std::uint32_t>((pts[i].x - min_x) * cell);
    const auto hy = static_cast<std::uint32_t>((pts[i].y - min_y) * cell);
    keyed[i] = {HilbertIndex(hx, hy), i};
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (round[a] != round[b]) return round[a] < round[b];
    if (keyed[a].first != keyed[b].first) return keyed[a].first < keyed[b].first;
    return a < b;
  });
  return order;
}

// Removes points within kDuplicateDistance of an earlier point.
void Deduplicate(std::span<const Point2> input, std::vector<Point2>* pts,
                 std::vector<std::uint32_t>* source) {
  constexpr double kCell = 1e-6;
  constexpr double kDup2 = Triangulation::kDuplicateDistance *
                           Triangulation::kDuplicateDistance;
  struct KeyHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k)
        const {
      return std::hash<std::int64_t>()(k.first * 0x9E3779B97F4A7C15LL ^
                                       k.second);
    }
  };
  std::unordered_map<std::pair<std::int64_t, std::int64_t>,
                     std::vector<std::uint32_t>, KeyHash>
      grid;
  grid.reserve(input.size());
  for (std::uint32_t i = 0; i < input.size(); ++i) {
    const Point2& p = input[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kDegenerateInput,
                  "triangulation input contains a non-finite point");
    }
    const auto kx = static_cast<std::int64_t>(std::floor(p.x / kCell));
    const auto ky = static_cast<std::int64_t>(std::floor(p.y / kCell));
    bool duplicate = false;
    for (std::int64_t dx = -1; dx <= 1 && !duplicate; ++dx) {
      for (std::int64_t dy = -1; dy <= 1 && !duplicate; ++dy) {
        auto it = grid.find({kx + dx, ky + dy});
        if (it == grid.end()) continue;
        for (std::uint32_t j : it->second) {
          const double ex = (*pts)[j].x - p.x, ey = (*pts)[j].y - p.y;
          if (ex * ex + ey * ey <= kDup2) {
            duplicate = true;
            break;
          }
        }
      }
    }
    if (duplicate) continue;
    grid[{kx, ky}].push_back(static_cast<std::uint32_t>(pts->size()));
    pts->push_back(p);
    source->push_back(i);
  }
}

class Builder {
 public:
  explicit Builder(const std::vector<Point2>& pts) : pts_(pts) {}

  void Run() {
    const std::vector<int> order = InsertionOrder(pts_);
    // Seed with the first non-collinear triple in insertion order.
    const int a = order[0], b = order[1];
    int k = 2;
    while (k < static_cast<int>(order.size()) &&
           Orient2d(pts_[a], pts_[b], pts_[order[k]]) == 0.0) {
      ++k;
    }
    if (k == static_cast<int>(order.size())) {
      throw Error(ErrorCode::kDegenerateInput,
                  "triangulation input points are all collinear");
    }
    const int c = order[k];
    if (Orient2d(pts_[a], pts_[b], pts_[c]) > 0) {
      Seed(a, b, c);
    } else {
      Seed(a, c, b);
    }
    for (int i = 2; i < static_cast<int>(order.size()); ++i) {
      if (i == k) continue;
      Insert(order[i]);
    }
  }

  Triangulation Finish(std::vector<Point2> vertices,
                       std::vector<std::uint32_t> source) {
    Triangulation out;
    out.vertices = std::move(vertices);
    out.source_index = std::move(source);
    std::vector<int> remap(tris_.size(), kNoNeighbor);
    int count = 0;
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (alive_[t] && !tris_[t].IsGhost()) remap[t] = count++;
    }
    out.triangles.reserve(count);
    out.neighbors.reserve(count);
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (remap[t] == kNoNeighbor) continue;
      out.triangles.push_back(tris_[t].v);
      std::array<int, 3> nb;
      for (int i = 0; i < 3; ++i) nb[i] = remap[tris_[t].n[i]];
      out.neighbors.push_back(nb);
    }
    return out;
  }

 private:
  void Seed(int a, int b, int c) {
    // Finite triangle 0 plus one ghost per edge.
    const int t0 = NewTri({a, b, c});
    const int g_ab = NewTri({b, a, kInfinite});
    const int g_bc = NewTri({c, b, kInfinite});
    const int g_ca = NewTri({a, c, kInfinite});
    tris_[t0].n = {g_bc, g_ca, g_ab};
    // Ghost (x, y, inf): n[0] across (y, inf), n[1] across (inf, x),
    // n[2] across (x, y).
    tris_[g_ab].n = {g_ca, g_bc, t0};
    tris_[g_bc].n = {g_ab, g_ca, t0};
    tris_[g_ca].n = {g_bc, g_ab, t0};
    last_ = t0;
  }

  int NewTri(std::array<int, 3> v) {
    int t;
    if (!free_.empty()) {
      t = free_.back();
      free_.pop_back();
      tris_[t].v = v;
      alive_[t] = true;
      mark_[t] = 0;
    } else {
      t = static_cast<int>(tris_.size());
      tris_.push_back({v, {kNoNeighbor, kNoNeighbor, kNoNeighbor}});
      alive_.push_back(true);
      mark_.push_back(0);
    }
    return t;
  }

  bool InConflict(int t, const Point2& p) const {
    const Tri& tri = tris_[t];
    if (!tri.IsGhost()) {
      return InCircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], p) > 0;
    }
    const Point2& a = pts_[tri.v[0]];
    const Point2& b = pts_[tri.v[1]];
    const double o = Orient2d(a, b, p);
    if (o > 0) return true;
    if (o < 0) return false;
    // Collinear: conflict only strictly inside segment ab.
    if (a.x != b.x) {
      return (p.x > std::min(a.x, b.x)) && (p.x < std::max(a.x, b.x));
    }
    return (p.y > std::min(a.y, b.y)) && (p.y < std::max(a.y, b.y));
  }

  // Returns a triangle in conflict with p.
  int Walk(const Point2& p, int start) const {
    int t = start;
    int rotate = 0;
    while (true) {
      const Tri& tri = tris_[t];
      if (tri.IsGhost()) {
        if (InConflict(t, p)) return t;
        t = tri.n[2];
        continue;
      }
      int next = kNoNeighbor;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + rotate) % 3;
        const Point2& u = pts_[tri.v[(i + 1) % 3]];
        const Point2& w = pts_[tri.v[(i + 2) % 3]];
        if (Orient2d(u, w, p) < 0) {
          next = tri.n[i];
          break;
        }
      }
      if (next == kNoNeighbor) return t;
      rotate = (rotate + 1) % 3;
      t = next;
    }
  }

  void Insert(int vertex) {
    const Point2& p = pts_[vertex];
    const int start = Walk(p, last_);
    ++epoch_;
    cavity_.clear();
    boundary_.clear();
    stack_.clear();
    stack_.push_back(start);
    mark_[start] = epoch_;
    while (!stack_.empty()) {
      const int t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      for (int i = 0; i < 3; ++i) {
        const int o = tris_[t].n[i];
        if (mark_[o] == epoch_) continue;
        if (InConflict(o, p)) {
          mark_[o] = epoch_;
          stack_.push_back(o);
        } else {
          boundary_.push_back({t, i});
        }
      }
    }

    // One new triangle (u, w, p) per boundary edge u->w of the cavity.
    fan_.clear();
    for (const auto& [t, i] : boundary_) {
      const Tri& tri = tris_[t];
      fan_.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], tri.n[i], -1});
    }
    for (int t : cavity_) {
      alive_[t] = false;
      free_.push_back(t);
    }
    for (auto& e : fan_) e.tri = NewTri({e.u, e.w, vertex});

    // The cavity boundary is a simple cycle, so every vertex starts exactly
    // one edge and ends exactly one.
    by_u_.clear();
    by_w_.clear();
    for (const auto& e : fan_) {
      by_u_.push_back({e.u, e.tri});
      by_w_.push_back({e.w, e.tri});
    }
    std::sort(by_u_.begin(), by_u_.end());
    std::sort(by_w_.begin(), by_w_.end());
    auto lookup = [](const std::vector<std::pair<int, int>>& table, int key) {
      return std::lower_bound(table.begin(), table.end(),
                              std::make_pair(key, INT32_MIN))
          ->second;
    };
    for (const auto& e : fan_) {
      // Logical layout (u, w, p): across (w, p) is the triangle starting at
      // w, across (p, u) the one ending at u, across (u, w) the old outer one.
      std::array<int, 3> v = {e.u, e.w, vertex};
      std::array<int, 3> n = {lookup(by_u_, e.w), lookup(by_w_, e.u), e.outer};
      if (e.u == kInfinite) {
        v = {e.w, vertex, kInfinite};
        n = {n[1], n[2], n[0]};
      } else if (e.w == kInfinite) {
        v = {vertex, e.u, kInfinite};
        n = {n[2], n[0], n[1]};
      }
      tris_[e.tri].v = v;
      tris_[e.tri].n = n;
      Tri& outer = tris_[e.outer];
      for (int j = 0; j < 3; ++j) {
        if (outer.v[j] != e.u && outer.v[j] != e.w) {
          outer.n[j] = e.tri;
          break;
        }
      }
    }
    last_ = fan_.front().tri;
    if (tris_[last_].IsGhost()) {
      for (auto& e : fan_) {
        if (!tris_[e.tri].IsGhost()) {
          last_ = e.tri;
          break;
        }
      }
    }
  }

  const std::vector<Point2>& pts_;
  std::vector<Tri> tris_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> mark_;
  std::vector<int> free_;
  std::uint32_t epoch_ = 0;
  int last_ = 0;

  std::vector<int> cavity_;
  std::vector<std::pair<int, int>> boundary_;
  std::vector<int> stack_;
  struct FanEdge {
    int u, w, outer, tri;
  };
  std::vector<FanEdge> fan_;
  std::vector<std::pair<int, int>> by_u_;
  std::vector<std::pair<int, int>> by_w_;
};

}  // namespace

Triangulation Triangulate(std::span<const Point2> points) {
  std::vector<Point2> pts;
  std::vector<std::uint32_t> source;
  pts.reserve(points.size());
  source.reserve(points.size());
  Deduplicate(points, &pts, &source);
  if (pts.size() < 3) {
    throw Error(ErrorCode::kDegenerateInput,
                "triangulation needs at least 3 distinct points");
  }
  Builder builder(pts);
  builder.Run();
  return builder.Finish(std::move(pts), std::move(source));
}

std::optional<BarycentricCoords> Locate(const Triangulation& t,
                                        const Point2& q, int hint) {
  if (t.triangles.empty()) return std::nullopt;
  int current = (hint >= 0 && hint < int(t.size())) ? hint : 0;
  const std::size_t max_steps = 4 * t.size() + 16;
  int rotate = 0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto& v = t.triangles[current];
    int next = -2;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + rotate) % 3;
      if (Orient2d(t.vertices[v[(i + 1) % 3]], t.vertices[v[(i + 2) % 3]],
                   q) < 0) {
        next = t.neighbors[current][i];
        break;
      }
    }
    if (next == kNoNeighbor) return std::nullopt;  // beyond a hull edge
    if (next == -2) {
      const Point2& a = t.vertices[v[0]];
      const Point2& b = t.vertices[v[1]];
      const Point2& c = t.vertices[v[2]];
      // Sub-areas from differences to q so a query exactly at a vertex gets
      // exact zero weights on the other two.
      const double ax = a.x - q.x, ay = a.y - q.y;
      const double bx = b.x - q.x, by = b.y - q.y;
      const double cx = c.x - q.x, cy = c.y - q.y;
      double wa = std::max(0.0, bx * cy - by * cx);
      double wb = std::max(0.0, cx * ay - cy * ax);
      double wc = std::max(0.0, ax * by - ay * bx);
      const double total = wa + wb + wc;
      BarycentricCoords out;
      out.triangle = current;
      if (total > 0.0) {
        out.weights = {wa / total, wb / total, wc / total};
      } else {
        out.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
      }
      return out;
    }
    rotate = (rotate + 1) % 3;
    current = next;
  }
  throw Error(ErrorCode::kDegenerateInput, "point location walk did not terminate");
}

std::optional<double> Interpolate(const Triangulation& t,
                                  std::span<const double> values,
                                  const Point2& q, int* hint) {
  const auto bc = Locate(t, q, hint ? *hint : 0);
  if (!bc) return std::nullopt;
  if (hint) *hint = bc->triangle;
  const auto& v = t.triangles[bc->triangle];
  return bc->weights[0] * values[v[0]] + bc->weights[1] * values[v[1]] +
         bc->weights[2] * values[v[2]];
}

}  // namespace lensrect
