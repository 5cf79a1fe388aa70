#include "lensrect/rectification.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "lensrect/delaunay.h"
#include "lensrect/error.h"
#include "lensrect/parallel.h"

namespace lensrect {
namespace {

nlohmann::json CenterJson(const DistortionCenter& c) {
  return {{"cx", c.cx}, {"cy", c.cy}};
}

nlohmann::json PolyJson(const RadialPolyParams& p) {
  return {{"direction", std::string(ModelDirectionName(p.direction))},
          {"k1", p.k1},
          {"k2", p.k2},
          {"center", CenterJson(p.center)}};
}

nlohmann::json NewtonJson(const NewtonConfig& cfg) {
  return {{"mode", cfg.mode == NewtonMode::kSingleIteration
                       ? "single_iteration"
                       : "to_convergence"},
          {"tolerance", cfg.tolerance},
          {"max_iterations", cfg.max_iterations}};
}

void CheckSizes(ImageSize out, ImageSize src) {
  if (out.width <= 0 || out.height <= 0 || src.width <= 0 ||
      src.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "map dimensions must be positive");
  }
}

MapEntry EntryFromStencil(const BilinearStencil& s) {
  MapEntry e;
  e.count = static_cast<std::uint8_t>(s.count);
  for (int k = 0; k < s.count; ++k) {
    e.source[k] = s.index[k];
    e.weight[k] = static_cast<float>(s.weight[k]);
  }
  return e;
}

}  // namespace

std::string_view MapMethodName(MapMethod method) {
  switch (method) {
    case MapMethod::kForwardBilinear: return "forward";
    case MapMethod::kNewtonSingle: return "newton1";
    case MapMethod::kNewtonConverged: return "newton";
    case MapMethod::kRationalBilinear: return "rational";
    case MapMethod::kTriangulationLinear: return "triangulation";
  }
  return "unknown";
}

std::optional<MapMethod> ParseMapMethod(std::string_view name) {
  for (MapMethod m : kAllMapMethods) {
    if (MapMethodName(m) == name) return m;
  }
  return std::nullopt;
}

std::size_t RectificationMap::CountValid() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(),
      [](const MapEntry& e) { return e.valid(); }));
}

RectificationMap BuildBilinearMap(const PointMapping& mapping,
                                  MapMethod method, ImageSize out,
                                  ImageSize src,
                                  const MapBuildOptions& options) {
  CheckSizes(out, src);
  RectificationMap map;
  map.method = method;
  map.out = out;
  map.src = src;
  map.entries.resize(out.pixel_count());
  std::atomic<std::size_t> failed{0};
  ParallelFor(out.height, options.threads, [&](int row_begin, int row_end) {
    std::size_t local_failed = 0;
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const auto source = mapping({double(x), double(y)});
        if (!source) {
          ++local_failed;
          continue;
        }
        BilinearStencil stencil;
        if (ComputeBilinearStencil(src.width, src.height,
                                   {source->x, source->y}, &stencil)) {
          map.entries[std::size_t(y) * out.width + x] =
              EntryFromStencil(stencil);
        }
      }
    }
    failed += local_failed;
  });
  map.failed_count = failed;
  return map;
}

RectificationMap BuildMapForward(const RadialPolyParams& forward,
                                 ImageSize out, ImageSize src,
                                 const MapBuildOptions& options) {
  RequireDirection(forward, ModelDirection::kForward, "forward rectification");
  RectificationMap map = BuildBilinearMap(
      [&forward](const ScreenPoint& p) -> std::optional<ScreenPoint> {
        return Denormalize(MapPoint(Normalize(p, forward.center), forward),
                           forward.center);
      },
      MapMethod::kForwardBilinear, out, src, options);
  map.provenance = {{"method", "forward"}, {"params", PolyJson(forward)}};
  return map;
}

RectificationMap BuildMapNewton(const RadialPolyParams& inverse,
                                const NewtonConfig& config, ImageSize out,
                                ImageSize src,
                                const MapBuildOptions& options) {
  RequireDirection(inverse, ModelDirection::kInverse, "Newton rectification");
  const MapMethod method = config.mode == NewtonMode::kSingleIteration
                               ? MapMethod::kNewtonSingle
                               : MapMethod::kNewtonConverged;
  RectificationMap map = BuildBilinearMap(
      [&](const ScreenPoint& p) -> std::optional<ScreenPoint> {
        const NormalizedPoint pu = Normalize(p, inverse.center);
        const double ru = pu.Radius();
        if (ru == 0.0) return p;
        const NewtonResult r = TryNewtonInvertRadius(ru, inverse, config);
        if (r.status != NewtonStatus::kConverged) return std::nullopt;
        const double s = r.radius / ru;
        return Denormalize({pu.x * s, pu.y * s}, inverse.center);
      },
      method, out, src, options);
  map.provenance = {{"method", std::string(MapMethodName(method))},
                    {"params", PolyJson(inverse)},
                    {"newton", NewtonJson(config)},
                    {"failed_count", map.failed_count}};
  return map;
}

RectificationMap BuildMapRational(const RationalInverseParams& params,
                                  ImageSize out, ImageSize src,
                                  const MapBuildOptions& options) {
  CheckSizes(out, src);
  const double max_radius = CornerRadius(out.width, out.height, params.center);
  if (!DenominatorPositiveOn(params, max_radius)) {
    throw Error(ErrorCode::kDenominatorSign,
                "rational model denominator is not positive over the output "
                "image");
  }
  RectificationMap map = BuildBilinearMap(
      [&params](const ScreenPoint& p) -> std::optional<ScreenPoint> {
        return Denormalize(
            RationalMapPoint(Normalize(p, params.center), params),
            params.center);
      },
      MapMethod::kRationalBilinear, out, src, options);
  map.provenance = {{"method", "rational"},
                    {"alpha", params.alpha},
                    {"center", CenterJson(params.center)}};
  return map;
}

RectificationMap BuildMapTriangulation(const RadialPolyParams& inverse,
                                       ImageSize out, ImageSize src,
                                       const MapBuildOptions& options) {
  RequireDirection(inverse, ModelDirection::kInverse,
                   "triangulation rectification");
  CheckSizes(out, src);
  if (src.pixel_count() < 3) {
    throw Error(ErrorCode::kDegenerateInput,
                "triangulation needs a source with at least 3 pixels");
  }
  std::vector<Point2> mapped(src.pixel_count());
  ParallelFor(src.height, options.threads, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < src.width; ++x) {
        const ScreenPoint p = Denormalize(
            MapPoint(Normalize({double(x), double(y)}, inverse.center),
                     inverse),
            inverse.center);
        mapped[std::size_t(y) * src.width + x] = {p.x, p.y};
      }
    }
  });
  const Triangulation tri = Triangulate(mapped);

  RectificationMap map;
  map.method = MapMethod::kTriangulationLinear;
  map.out = out;
  map.src = src;
  map.entries.resize(out.pixel_count());
  ParallelFor(out.height, options.threads, [&](int row_begin, int row_end) {
    int hint = 0;
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const auto bc = Locate(tri, {double(x), double(y)}, hint);
        if (!bc) continue;
        hint = bc->triangle;
        MapEntry& e = map.entries[std::size_t(y) * out.width + x];
        const auto& v = tri.triangles[bc->triangle];
        for (int k = 0; k < 3; ++k) {
          if (bc->weights[k] == 0.0) continue;
          e.source[e.count] = tri.source_index[v[k]];
          e.weight[e.count] = static_cast<float>(bc->weights[k]);
          ++e.count;
        }
      }
    }
  });
  map.provenance = {{"method", "triangulation"},
                    {"params", PolyJson(inverse)},
                    {"vertices", tri.vertices.size()},
                    {"triangles", tri.size()}};
  return map;
}

MaskedImage ApplyMap(const RectificationMap& map, const RasterImage& source,
                     const ValidityMask* source_mask, int threads) {
  if (source.width() != map.src.width || source.height() != map.src.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image is " + std::to_string(source.width()) + "x" +
                    std::to_string(source.height()) + " but the map expects " +
                    std::to_string(map.src.width) + "x" +
                    std::to_string(map.src.height));
  }
  if (source_mask && (source_mask->width != source.width() ||
                      source_mask->height != source.height())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "source mask does not match the source image");
  }
  const int channels = source.channels();
  MaskedImage result{RasterImage(map.out.width, map.out.height, channels),
                     ValidityMask(map.out.width, map.out.height, false)};
  ParallelFor(map.out.height, threads, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < map.out.width; ++x) {
        const std::size_t pixel = std::size_t(y) * map.out.width + x;
        const MapEntry& e = map.entries[pixel];
        if (!e.valid()) continue;
        if (source_mask) {
          bool ok = true;
          for (int k = 0; k < e.count; ++k) {
            ok = ok && source_mask->valid[e.source[k]];
          }
          if (!ok) continue;
        }
        for (int c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (int k = 0; k < e.count; ++k) {
            acc += double(e.weight[k]) * source.sample(e.source[k], c);
          }
          result.image.sample(pixel, c) = static_cast<float>(acc);
        }
        result.mask.valid[pixel] = 1;
      }
    }
  });
  return result;
}

MaskedImage ApplySyntheticDistortion(const RasterImage& source,
                                     const RadialPolyParams& inverse,
                                     int threads) {
  RequireDirection(inverse, ModelDirection::kInverse, "distortion synthesis");
  const int w = source.width(), h = source.height(), channels = source.channels();
  MaskedImage result{RasterImage(w, h, channels), ValidityMask(w, h, false)};
  ParallelFor(h, threads, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < w; ++x) {
        const ScreenPoint undistorted = Denormalize(
            MapPoint(Normalize({double(x), double(y)}, inverse.center),
                     inverse),
            inverse.center);
        BilinearStencil s;
        if (!ComputeBilinearStencil(w, h, {undistorted.x, undistorted.y}, &s))
          continue;
        const std::size_t pixel = std::size_t(y) * w + x;
        for (int c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (int k = 0; k < s.count; ++k) {
            acc += s.weight[k] * source.sample(s.index[k], c);
          }
          result.image.sample(pixel, c) = static_cast<float>(acc);
        }
        result.mask.valid[pixel] = 1;
      }
    }
  });
  return result;
}

}  // namespace lensrect
