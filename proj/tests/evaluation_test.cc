#include "lensrect/evaluation.h"

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "lensrect/image_io.h"
#include "test_util.h"

namespace lensrect {
namespace {

RasterImage Ramp(int w, int h, int channels) {
  RasterImage img(w, h, channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(x, y, c) = float((x * 3 + y * 5 + c * 40) % 200 + 20);
      }
    }
  }
  return img;
}

// Top-left crop of a bundled test image, small enough for quick sweeps.
SweepImage BundledCrop(const std::string& name, int w, int h) {
  const RasterImage full =
      ReadImage(std::string(LENSRECT_TEST_DATA_DIR) + "/" + name + ".png");
  RasterImage crop(w, h, full.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < full.channels(); ++c) {
        crop.at(x, y, c) = full.at(x + 200, y + 100, c);
      }
    }
  }
  return {name, crop};
}

std::vector<SweepImage> BundledCrops(int w, int h) {
  return {BundledCrop("landscape", w, h), BundledCrop("geometric", w, h),
          BundledCrop("texture", w, h)};
}

std::vector<MapMethod> InverseMethods() {
  return {kInverseMapMethods.begin(), kInverseMapMethods.end()};
}

TEST(PsnrTest, ClosedForm) {
  EXPECT_TRUE(std::isinf(PsnrFromRmse(0.0)));
  EXPECT_GT(PsnrFromRmse(0.0), 0.0);
  EXPECT_NEAR(PsnrFromRmse(1.0), 48.1308036, 1e-6);
  EXPECT_NEAR(PsnrFromRmse(255.0), 0.0, 1e-12);
}

TEST(CompareTest, IdenticalImages) {
  const RasterImage a = Ramp(20, 10, 3);
  const MetricReport r = Compare(a, a, nullptr, 3);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_TRUE(std::isinf(r.psnr));
  EXPECT_EQ(r.crop_margin, 3);
  EXPECT_EQ(r.valid_pixel_count, 14u * 4u);
}

TEST(CompareTest, OffsetByOne) {
  const RasterImage a = Ramp(20, 10, 3);
  RasterImage b = a;
  for (float& s : b.samples()) s += 1.0f;
  const MetricReport r = Compare(a, b, nullptr, 0);
  EXPECT_NEAR(r.rmse, 1.0, 1e-12);
  EXPECT_NEAR(r.psnr, 20 * std::log10(255.0), 1e-9);
  EXPECT_NEAR(r.psnr, 48.13, 5e-3);
}

TEST(CompareTest, BorderDifferencesAreCropped) {
  const RasterImage a = Ramp(20, 12, 1);
  RasterImage b = a;
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 20; ++x) {
      if (x < 2 || y < 2 || x >= 18 || y >= 10) b.at(x, y) = 0.0f;
    }
  }
  EXPECT_EQ(Compare(a, b, nullptr, 3).rmse, 0.0);
  EXPECT_GT(Compare(a, b, nullptr, 1).rmse, 0.0);
}

TEST(CompareTest, MasksExcludePixels) {
  const RasterImage a = Ramp(10, 10, 1);
  RasterImage b = a;
  b.at(5, 5) = 255.0f;
  ValidityMask mask(10, 10, true);
  mask.valid[5 * 10 + 5] = 0;
  EXPECT_EQ(Compare(a, b, &mask, 0).rmse, 0.0);
  EXPECT_EQ(Compare(a, b, &mask, 0).valid_pixel_count, 99u);
  EXPECT_EQ(Compare(b, a, nullptr, 0, &mask).rmse, 0.0);
  EXPECT_GT(Compare(a, b, nullptr, 0).rmse, 0.0);
}

TEST(CompareTest, JointOverChannels) {
  RasterImage a(1, 1, 3, 0.0f), b(1, 1, 3, 0.0f);
  b.at(0, 0, 1) = 3.0f;
  EXPECT_NEAR(Compare(a, b, nullptr, 0).rmse, std::sqrt(9.0 / 3.0), 1e-12);
}

TEST(CompareTest, IsSymmetric) {
  const RasterImage a = Ramp(30, 20, 3);
  RasterImage b = Ramp(30, 20, 3);
  for (std::size_t i = 0; i < b.samples().size(); i += 7) {
    b.samples()[i] += float(i % 13) - 6.0f;
  }
  ValidityMask mask(30, 20, true);
  for (std::size_t i = 0; i < mask.valid.size(); i += 5) mask.valid[i] = 0;
  EXPECT_DOUBLE_EQ(Compare(a, b, &mask, 2, &mask).rmse,
                   Compare(b, a, &mask, 2, &mask).rmse);
}

TEST(CompareTest, TranslationSensitive) {
  const RasterImage a = Ramp(30, 20, 1);
  RasterImage shifted(30, 20, 1);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) shifted.at(x, y) = a.at(std::max(0, x - 1), y);
  }
  EXPECT_GT(Compare(a, shifted, nullptr, 3).rmse, 0.0);
}

TEST(CompareTest, Errors) {
  const RasterImage a = Ramp(10, 10, 1);
  EXPECT_LENSRECT_ERROR(Compare(a, Ramp(10, 11, 1), nullptr, 0),
                        ErrorCode::kDimensionMismatch);
  EXPECT_LENSRECT_ERROR(Compare(a, Ramp(10, 10, 3), nullptr, 0),
                        ErrorCode::kDimensionMismatch);
  EXPECT_LENSRECT_ERROR(Compare(a, a, nullptr, 5), ErrorCode::kEmptyRegion);
  const ValidityMask none(10, 10, false);
  EXPECT_LENSRECT_ERROR(Compare(a, a, &none, 0), ErrorCode::kEmptyRegion);
  EXPECT_LENSRECT_ERROR(Compare(a, a, nullptr, -1),
                        ErrorCode::kInvalidArgument);
}

TEST(GridTest, LogSpacing) {
  const std::vector<double> g = MakeGrid(1e-13, 1e-11, 9, true);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-13);
  EXPECT_DOUBLE_EQ(g.back(), 1e-11);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_NEAR(g[i] / g[i - 1], std::pow(10.0, 0.25), 1e-12);
  }
  const std::vector<double> lin = MakeGrid(0.0, 4.0, 5, false);
  EXPECT_EQ(lin, (std::vector<double>{0, 1, 2, 3, 4}));
  const auto pairs = FifthRatioGrid({1e-11, 0.0});
  EXPECT_EQ(pairs[0].k1, 1e-11);
  EXPECT_DOUBLE_EQ(pairs[0].k2, 2e-12);
  EXPECT_EQ(pairs[1].k2, 0.0);
}

TEST(RunSweepTest, IdentityGridIsNearLossless) {
  const auto images = BundledCrops(96, 64);
  const SweepResult result =
      RunSweep(images, FifthRatioGrid({0.0}), InverseMethods(), {});
  EXPECT_TRUE(result.failures.empty());
  ASSERT_EQ(result.cases.size(), 3u * 4u);
  for (const MetricReport& r : result.cases) {
    EXPECT_LT(r.rmse, 0.5) << r.image << " " << MapMethodName(r.method);
    EXPECT_GT(r.valid_pixel_count, 0u);
    EXPECT_GE(r.build_time_seconds, 0.0);
  }
}

TEST(RunSweepTest, OrderingAndAggregation) {
  const auto images = BundledCrops(120, 80);
  const auto grid = FifthRatioGrid({1e-13, 1e-12});
  SweepConfig config;
  config.reference_width = 1920;
  const SweepResult result = RunSweep(images, grid, InverseMethods(), config);
  ASSERT_TRUE(result.failures.empty());
  ASSERT_EQ(result.cases.size(), 3u * 2u * 4u);
  std::size_t i = 0;
  for (const auto& image : images) {
    for (const KappaPair& k : grid) {
      for (MapMethod m : kInverseMapMethods) {
        const MetricReport& r = result.cases[i++];
        EXPECT_EQ(r.image, image.name);
        EXPECT_EQ(r.kappa1_prime, k.k1);
        EXPECT_EQ(r.kappa2_prime, k.k2);
        EXPECT_EQ(r.method, m);
      }
    }
  }
  ASSERT_EQ(result.summary.size(), 2u * 4u);
  for (const SweepSummaryRow& row : result.summary) {
    double sum_sq = 0.0;
    int n = 0;
    for (const MetricReport& r : result.cases) {
      if (r.kappa1_prime == row.kappa.k1 && r.method == row.method) {
        sum_sq += r.rmse * r.rmse;
        ++n;
      }
    }
    EXPECT_EQ(row.image_count, n);
    EXPECT_NEAR(row.mean_rmse, std::sqrt(sum_sq / n), 1e-12);
    EXPECT_NEAR(row.mean_psnr, PsnrFromRmse(row.mean_rmse), 1e-9);
  }
}

// Runs both grid endpoints on the same crops: checks the weak-end agreement,
// the strong-end finiteness and the monotonicity across the range.
TEST(RunSweepTest, EndpointBehaviour) {
  const auto images = BundledCrops(240, 135);
  SweepConfig config;
  config.reference_width = 1920;
  const SweepResult result = RunSweep(images, FifthRatioGrid({1e-13, 1e-11}),
                                      InverseMethods(), config);
  ASSERT_TRUE(result.failures.empty());

  std::map<std::pair<double, MapMethod>, double> mean_rmse;
  for (const SweepSummaryRow& row : result.summary) {
    mean_rmse[{row.kappa.k1, row.method}] = row.mean_rmse;
  }
  for (MapMethod m : kInverseMapMethods) {
    EXPECT_GE((mean_rmse[{1e-11, m}]), (mean_rmse[{1e-13, m}]))
        << MapMethodName(m);
  }

  for (const auto& image : images) {
    std::map<MapMethod, double> weak, strong;
    for (const MetricReport& r : result.cases) {
      if (r.image != image.name) continue;
      (r.kappa1_prime == 1e-13 ? weak : strong)[r.method] = r.psnr;
    }
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [m, psnr] : weak) {
      lo = std::min(lo, psnr);
      hi = std::max(hi, psnr);
    }
    EXPECT_LE(hi - lo, 1.0) << image.name;
    EXPECT_TRUE(std::isfinite(strong[MapMethod::kNewtonConverged]));
    EXPECT_TRUE(std::isfinite(strong[MapMethod::kTriangulationLinear]));
    RecordProperty(
        image.name + "_strong_psnr_difference",
        std::to_string(strong[MapMethod::kTriangulationLinear] -
                       strong[MapMethod::kNewtonConverged]));
  }
}

TEST(RunSweepTest, FailedCasesAreRecordedAndSkipped) {
  // A 2x1 image cannot be triangulated (collinear pixels) and leaves nothing
  // after cropping, but the other image still runs.
  std::vector<SweepImage> images = {{"tiny", RasterImage(2, 1, 1, 9.0f)},
                                    BundledCrop("geometric", 48, 32)};
  const SweepResult result = RunSweep(
      images, FifthRatioGrid({0.0}),
      {MapMethod::kNewtonConverged, MapMethod::kTriangulationLinear}, {});
  EXPECT_EQ(result.failures.size(), 2u);
  for (const SweepFailure& f : result.failures) {
    EXPECT_EQ(f.image, "tiny");
    EXPECT_FALSE(f.message.empty());
  }
  ASSERT_EQ(result.cases.size(), 2u);
  EXPECT_EQ(result.cases[0].image, "geometric");
}

TEST(RunSweepTest, RejectsInvalidConfigurations) {
  const auto images = BundledCrops(32, 32);
  EXPECT_LENSRECT_ERROR(
      RunSweep(images, FifthRatioGrid({0.0}), {MapMethod::kForwardBilinear},
               {}),
      ErrorCode::kInvalidArgument);
  EXPECT_LENSRECT_ERROR(RunSweep({}, FifthRatioGrid({0.0}), InverseMethods(), {}),
                        ErrorCode::kInvalidArgument);
  EXPECT_LENSRECT_ERROR(RunSweep(images, {}, InverseMethods(), {}),
                        ErrorCode::kInvalidArgument);
}

TEST(CsvTest, FixedColumnsAndInfinity) {
  SweepResult result;
  MetricReport r;
  r.image = "a.png";
  r.method = MapMethod::kTriangulationLinear;
  r.rmse = 0.0;
  r.psnr = PsnrFromRmse(0.0);
  r.valid_pixel_count = 12;
  result.cases.push_back(r);
  result.summary.push_back({{1e-11, 2e-12}, MapMethod::kNewtonSingle, 1, 2.0,
                            PsnrFromRmse(2.0), 0.5});
  std::ostringstream cases, summary;
  WriteCasesCsv(cases, result);
  WriteSummaryCsv(summary, result);
  std::istringstream cin(cases.str()), sin(summary.str());
  std::string header, row;
  std::getline(cin, header);
  EXPECT_EQ(header,
            "image,kappa1_prime,kappa2_prime,method,rmse,psnr,"
            "build_time_seconds,valid_pixel_count");
  std::getline(cin, row);
  EXPECT_EQ(row.rfind("a.png,0,0,triangulation,0,inf,", 0), 0u) << row;
  std::getline(sin, header);
  EXPECT_EQ(header,
            "kappa1_prime,kappa2_prime,method,image_count,mean_rmse,"
            "mean_psnr,mean_build_time_seconds");
  std::getline(sin, row);
  EXPECT_EQ(row.rfind("1e-11,2e-12,newton1,1,2,", 0), 0u) << row;
}

}  // namespace
}  // namespace lensrect
