#include "lensrect/raster_image.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "lensrect/image_io.h"
#include "test_util.h"

namespace lensrect {
namespace {

// Textbook bilinear interpolation written out independently of the library.
double ReferenceBilinear(const RasterImage& img, double x, double y, int c) {
  const int x0 = std::min(int(std::floor(x)), img.width() - 2);
  const int y0 = std::min(int(std::floor(y)), img.height() - 2);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0, c) +
         fx * (1 - fy) * img.at(x0 + 1, y0, c) +
         (1 - fx) * fy * img.at(x0, y0 + 1, c) +
         fx * fy * img.at(x0 + 1, y0 + 1, c);
}

RasterImage RandomImage(int w, int h, int channels, std::uint64_t seed) {
  RasterImage img(w, h, channels);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  for (float& s : img.samples()) s = float(u(rng));
  return img;
}

TEST(RasterImageTest, Shape) {
  RasterImage img(4, 3, 3, 7.0f);
  EXPECT_EQ(img.samples().size(), 36u);
  EXPECT_EQ(img.pixel_count(), 12u);
  EXPECT_EQ(img.at(3, 2, 2), 7.0f);
  img.at(1, 2, 1) = 9.0f;
  EXPECT_EQ(img.sample(2 * 4 + 1, 1), 9.0f);
  EXPECT_TRUE(img.SameShape(RasterImage(4, 3, 3)));
  EXPECT_FALSE(img.SameShape(RasterImage(4, 3, 1)));
}

TEST(BilinearSampleTest, PixelCenterReturnsPixel) {
  const RasterImage img = RandomImage(5, 4, 3, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) {
      const auto v = BilinearSample(img, {double(x), double(y)});
      ASSERT_TRUE(v.has_value());
      for (int c = 0; c < 3; ++c) EXPECT_EQ((*v)[c], img.at(x, y, c));
    }
  }
}

TEST(BilinearSampleTest, Midpoint) {
  RasterImage img(2, 1, 1);
  img.at(0, 0) = 10;
  img.at(1, 0) = 30;
  const auto v = BilinearSample(img, {0.5, 0});
  ASSERT_TRUE(v.has_value());
  EXPECT_FLOAT_EQ((*v)[0], 20.0f);
}

TEST(BilinearSampleTest, TwoByTwoPatch) {
  RasterImage img(2, 2, 1);
  img.at(0, 0) = 0;
  img.at(1, 0) = 100;
  img.at(0, 1) = 200;
  img.at(1, 1) = 300;
  // Weights (1-x)(1-y), x(1-y), (1-x)y, xy at (0.25, 0.75).
  const double expected = 0 * 0.75 * 0.25 + 100 * 0.25 * 0.25 +
                          200 * 0.75 * 0.75 + 300 * 0.25 * 0.75;
  EXPECT_DOUBLE_EQ(expected, ReferenceBilinear(img, 0.25, 0.75, 0));
  const auto v = BilinearSample(img, {0.25, 0.75});
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR((*v)[0], expected, 1e-4);
}

TEST(BilinearSampleTest, MatchesReferenceEverywhere) {
  const RasterImage img = RandomImage(17, 11, 3, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 16.0), uy(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = ux(rng), y = uy(rng);
    const auto v = BilinearSample(img, {x, y});
    ASSERT_TRUE(v.has_value());
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR((*v)[c], ReferenceBilinear(img, x, y, c), 1e-3);
    }
  }
}

TEST(BilinearSampleTest, OutOfBounds) {
  const RasterImage img = RandomImage(4, 4, 1, 4);
  EXPECT_FALSE(BilinearSample(img, {-0.01, 1}).has_value());
  EXPECT_FALSE(BilinearSample(img, {1, 3.01}).has_value());
  EXPECT_FALSE(BilinearSample(img, {NAN, 1}).has_value());
  EXPECT_TRUE(BilinearSample(img, {3, 3}).has_value());
  EXPECT_TRUE(BilinearSample(img, {0, 0}).has_value());
}

TEST(BilinearStencilTest, DropsZeroWeightsAndSumsToOne) {
  BilinearStencil s;
  ASSERT_TRUE(ComputeBilinearStencil(10, 10, {3, 4}, &s));
  EXPECT_EQ(s.count, 1);
  EXPECT_EQ(s.index[0], 43u);
  EXPECT_EQ(s.weight[0], 1.0);

  ASSERT_TRUE(ComputeBilinearStencil(10, 10, {9, 9}, &s));
  EXPECT_EQ(s.count, 1);
  EXPECT_EQ(s.index[0], 99u);

  ASSERT_TRUE(ComputeBilinearStencil(10, 10, {2.5, 9}, &s));
  EXPECT_EQ(s.count, 2);

  ASSERT_TRUE(ComputeBilinearStencil(10, 10, {2.3, 7.6}, &s));
  EXPECT_EQ(s.count, 4);
  double sum = 0;
  for (int i = 0; i < s.count; ++i) sum += s.weight[i];
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_FALSE(ComputeBilinearStencil(10, 10, {9.5, 0}, &s));
}

TEST(QuantizeSampleTest, RoundsAndClamps) {
  EXPECT_EQ(QuantizeSample(-3.0f), 0);
  EXPECT_EQ(QuantizeSample(0.49f), 0);
  EXPECT_EQ(QuantizeSample(0.5f), 1);
  EXPECT_EQ(QuantizeSample(127.6f), 128);
  EXPECT_EQ(QuantizeSample(300.0f), 255);
}

TEST(ValidityMaskTest, CountValid) {
  ValidityMask m(3, 2, true);
  EXPECT_EQ(m.CountValid(), 6u);
  m.valid[4] = 0;
  EXPECT_EQ(m.CountValid(), 5u);
  EXPECT_FALSE(m.at(1, 1));
}

class ImageIoTest : public ::testing::TestWithParam<std::pair<std::string, int>> {
};

TEST_P(ImageIoTest, RoundTripIsLossless) {
  const auto& [extension, channels] = GetParam();
  const auto dir = testing::ScratchDir();
  const RasterImage img = RandomImage(37, 23, channels, 5);
  const std::string path = (dir / ("img" + extension)).string();
  WriteImage(path, img);
  const RasterImage back = ReadImage(path);
  EXPECT_EQ(back, img);
}

INSTANTIATE_TEST_SUITE_P(
    Formats, ImageIoTest,
    ::testing::Values(std::make_pair(std::string(".png"), 1),
                      std::make_pair(std::string(".png"), 3),
                      std::make_pair(std::string(".pgm"), 1),
                      std::make_pair(std::string(".ppm"), 3)),
    [](const auto& info) {
      return info.param.first.substr(1) + std::to_string(info.param.second);
    });

TEST(ImageFileTest, QuantizesOnWrite) {
  const auto dir = testing::ScratchDir();
  RasterImage img(2, 1, 1);
  img.at(0, 0) = 12.7f;
  img.at(1, 0) = 400.0f;
  WriteImage((dir / "q.png").string(), img);
  const RasterImage back = ReadImage((dir / "q.png").string());
  EXPECT_EQ(back.at(0, 0), 13.0f);
  EXPECT_EQ(back.at(1, 0), 255.0f);
}

TEST(ImageFileTest, MissingFile) {
  EXPECT_LENSRECT_ERROR(ReadImage("/nonexistent/image.png"), ErrorCode::kIo);
}

TEST(ImageFileTest, UnsupportedContent) {
  const auto dir = testing::ScratchDir();
  const std::string path = (dir / "notes.png").string();
  std::ofstream(path) << "this is not an image";
  EXPECT_LENSRECT_ERROR(ReadImage(path), ErrorCode::kUnsupportedFormat);
  EXPECT_LENSRECT_ERROR(WriteImage((dir / "x.tiff").string(), RasterImage(2, 2, 1)),
                        ErrorCode::kUnsupportedFormat);
}

TEST(ImageFileTest, MaskRoundTrip) {
  const auto dir = testing::ScratchDir();
  ValidityMask m(5, 3, true);
  m.valid[2] = 0;
  m.valid[14] = 0;
  const std::string path = MaskPathFor((dir / "out.png").string());
  EXPECT_EQ(std::filesystem::path(path).filename(), "out.mask.pgm");
  WriteMask(path, m);
  const ValidityMask back = ReadMask(path);
  EXPECT_EQ(back.width, 5);
  EXPECT_EQ(back.height, 3);
  EXPECT_EQ(back.valid, m.valid);
}

}  // namespace
}  // namespace lensrect
