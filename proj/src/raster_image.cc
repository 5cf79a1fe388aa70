#include "lensrect/raster_image.h"

#include <algorithm>
#include <cmath>

#include "lensrect/error.h"

namespace lensrect {

RasterImage::RasterImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw Error(ErrorCode::kInvalidArgument,
                "image needs non-negative size and 1 or 3 channels");
  }
  samples_.assign(std::size_t(width) * height * channels, fill);
}

std::size_t ValidityMask::CountValid() const {
  return static_cast<std::size_t>(
      std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

bool ComputeBilinearStencil(int width, int height, const Point2& q,
                            BilinearStencil* stencil) {
  stencil->count = 0;
  if (!(q.x >= 0.0 && q.y >= 0.0 && q.x <= width - 1 && q.y <= height - 1)) {
    return false;
  }
  // The lower-left corner is clamped so q = w-1 uses the last cell with a
  // unit weight on its right column.
  const int x0 = std::min(static_cast<int>(q.x), std::max(width - 2, 0));
  const int y0 = std::min(static_cast<int>(q.y), std::max(height - 2, 0));
  const double fx = q.x - x0;
  const double fy = q.y - y0;
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double w = wx[dx] * wy[dy];
      if (w == 0.0) continue;
      stencil->index[stencil->count] =
          static_cast<std::uint32_t>((y0 + dy) * width + (x0 + dx));
      stencil->weight[stencil->count] = w;
      ++stencil->count;
    }
  }
  return true;
}

std::optional<std::vector<float>> BilinearSample(const RasterImage& img,
                                                 const Point2& q) {
  BilinearStencil s;
  if (!ComputeBilinearStencil(img.width(), img.height(), q, &s)) {
    return std::nullopt;
  }
  std::vector<float> out(img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    double acc = 0.0;
    for (int k = 0; k < s.count; ++k) acc += s.weight[k] * img.sample(s.index[k], c);
    out[c] = static_cast<float>(acc);
  }
  return out;
}

std::uint8_t QuantizeSample(float v) {
  const float r = std::round(std::clamp(v, 0.0f, 255.0f));
  return static_cast<std::uint8_t>(r);
}

}  // namespace lensrect
