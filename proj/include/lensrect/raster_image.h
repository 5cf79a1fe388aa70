#ifndef LENSRECT_RASTER_IMAGE_H_
#define LENSRECT_RASTER_IMAGE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lensrect/predicates.h"

namespace lensrect {

// Row-major, channel-interleaved float image with intensities in [0, 255].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return std::size_t(width_) * height_; }
  bool empty() const { return samples_.empty(); }

  float& at(int x, int y, int c = 0) {
    return samples_[(std::size_t(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return samples_[(std::size_t(y) * width_ + x) * channels_ + c];
  }
  // Channel c of the pixel with linear index y * width + x.
  float sample(std::size_t pixel, int c) const {
    return samples_[pixel * channels_ + c];
  }
  float& sample(std::size_t pixel, int c) {
    return samples_[pixel * channels_ + c];
  }

  std::span<float> samples() { return samples_; }
  std::span<const float> samples() const { return samples_; }

  bool SameShape(const RasterImage& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> samples_;
};

// Per-pixel validity flags (1 = valid), row-major.
struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool value)
      : width(w), height(h), valid(std::size_t(w) * h, value ? 1 : 0) {}

  bool at(int x, int y) const { return valid[std::size_t(y) * width + x]; }
  std::size_t CountValid() const;
};

// Up to four (pixel index, weight) pairs from the standard bilinear stencil
// around q. Zero weights are omitted. Returns false when q lies outside
// [0, w-1] x [0, h-1].
struct BilinearStencil {
  int count = 0;
  std::array<std::uint32_t, 4> index{};
  std::array<double, 4> weight{};
};
bool ComputeBilinearStencil(int width, int height, const Point2& q,
                            BilinearStencil* stencil);

// Per-channel bilinear sample; nullopt when q is out of bounds.
std::optional<std::vector<float>> BilinearSample(const RasterImage& img,
                                                 const Point2& q);

// Rounds to nearest and clamps to [0, 255].
std::uint8_t QuantizeSample(float v);

}  // namespace lensrect

#endif  // LENSRECT_RASTER_IMAGE_H_
