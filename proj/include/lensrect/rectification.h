#ifndef LENSRECT_RECTIFICATION_H_
#define LENSRECT_RECTIFICATION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lensrect/distortion_model.h"
#include "lensrect/inverse_approximation.h"
#include "lensrect/raster_image.h"

namespace lensrect {

// The numeric values are the method tags stored in map files.
enum class MapMethod : std::uint8_t {
  kForwardBilinear = 0,
  kNewtonSingle = 1,
  kNewtonConverged = 2,
  kRationalBilinear = 3,
  kTriangulationLinear = 4,
};

inline constexpr std::array<MapMethod, 5> kAllMapMethods = {
    MapMethod::kForwardBilinear, MapMethod::kNewtonSingle,
    MapMethod::kNewtonConverged, MapMethod::kRationalBilinear,
    MapMethod::kTriangulationLinear};

// Methods that only need inverse parameters.
inline constexpr std::array<MapMethod, 4> kInverseMapMethods = {
    MapMethod::kNewtonSingle, MapMethod::kNewtonConverged,
    MapMethod::kRationalBilinear, MapMethod::kTriangulationLinear};

// "forward", "newton1", "newton", "rational", "triangulation".
std::string_view MapMethodName(MapMethod method);
std::optional<MapMethod> ParseMapMethod(std::string_view name);

struct ImageSize {
  int width = 0;
  int height = 0;

  std::size_t pixel_count() const { return std::size_t(width) * height; }
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Source pixels (linear index y * src_width + x) and weights contributing to
// one output pixel. count == 0 marks an invalid pixel. Zero weights are not
// stored, so an output pixel that coincides with a source sample has a single
// weight-1 contribution.
struct MapEntry {
  std::uint8_t count = 0;
  std::array<std::uint32_t, 4> source{};
  std::array<float, 4> weight{};

  bool valid() const { return count > 0; }
  friend bool operator==(const MapEntry&, const MapEntry&) = default;
};

// Lookup table mapping every rectified pixel to its distorted-image
// contributors; reusable for any image with the same distortion.
struct RectificationMap {
  MapMethod method = MapMethod::kForwardBilinear;
  ImageSize out;
  ImageSize src;
  std::vector<MapEntry> entries;  // out.width * out.height, row-major
  // Entries left invalid because the per-pixel solve failed (Newton
  // divergence); out-of-bounds pixels are not counted here.
  std::size_t failed_count = 0;
  // Builder parameters, written to the JSON sidecar of map files.
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t CountValid() const;
};

struct MapBuildOptions {
  int threads = 0;  // 0 = all hardware threads
};

// Rectified screen point -> distorted screen point; nullopt when the mapping
// fails for that point.
using PointMapping =
    std::function<std::optional<ScreenPoint>(const ScreenPoint&)>;

// For every output pixel evaluates `mapping` and records the bilinear stencil
// of the returned source position. Positions outside the source are invalid.
RectificationMap BuildBilinearMap(const PointMapping& mapping,
                                  MapMethod method, ImageSize out,
                                  ImageSize src,
                                  const MapBuildOptions& options = {});

// Conventional rectification from forward parameters.
RectificationMap BuildMapForward(const RadialPolyParams& forward,
                                 ImageSize out, ImageSize src,
                                 const MapBuildOptions& options = {});

// Forward mapping approximated per pixel with Newton's method. The method tag
// follows config.mode. Diverging pixels become invalid and are counted in
// failed_count.
RectificationMap BuildMapNewton(const RadialPolyParams& inverse,
                                const NewtonConfig& config, ImageSize out,
                                ImageSize src,
                                const MapBuildOptions& options = {});

// Forward mapping from a fitted rational model. Throws kDenominatorSign if the
// denominator is not positive out to the output corner radius.
RectificationMap BuildMapRational(const RationalInverseParams& params,
                                  ImageSize out, ImageSize src,
                                  const MapBuildOptions& options = {});

// Maps every source pixel through the inverse model, triangulates the mapped
// points and records, for each output pixel, the enclosing triangle's source
// pixels with barycentric weights. Pixels outside the hull are invalid.
RectificationMap BuildMapTriangulation(const RadialPolyParams& inverse,
                                       ImageSize out, ImageSize src,
                                       const MapBuildOptions& options = {});

struct MaskedImage {
  RasterImage image;
  ValidityMask mask;
};

// Weighted sum of each output pixel's contributions, per channel. Invalid
// entries, and entries touching an invalid source pixel when `source_mask` is
// given, produce 0 and a cleared mask bit. Throws kDimensionMismatch.
MaskedImage ApplyMap(const RectificationMap& map, const RasterImage& source,
                     const ValidityMask* source_mask = nullptr,
                     int threads = 0);

// Produces a distorted image: every output pixel is mapped through the
// inverse model to the undistorted source and bilinearly sampled there.
// Samples falling outside the source are 0 and masked invalid.
MaskedImage ApplySyntheticDistortion(const RasterImage& source,
                                     const RadialPolyParams& inverse,
                                     int threads = 0);

}  // namespace lensrect

#endif  // LENSRECT_RECTIFICATION_H_
