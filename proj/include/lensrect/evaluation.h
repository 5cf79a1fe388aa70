#ifndef LENSRECT_EVALUATION_H_
#define LENSRECT_EVALUATION_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lensrect/inverse_approximation.h"
#include "lensrect/rectification.h"

namespace lensrect {

inline constexpr int kDefaultCropMargin = 3;

// 20 log10(255 / rmse); +infinity when rmse == 0.
double PsnrFromRmse(double rmse);

struct MetricReport {
  double rmse = 0.0;  // 0-255 intensity scale, all channels jointly
  double psnr = 0.0;  // dB, +infinity when rmse == 0
  int crop_margin = 0;
  std::size_t valid_pixel_count = 0;

  // Filled in by the sweep.
  std::string image;
  MapMethod method = MapMethod::kTriangulationLinear;
  double kappa1_prime = 0.0;
  double kappa2_prime = 0.0;
  double build_time_seconds = 0.0;
};

// RMSE over pixels at least crop_margin away from every border that are valid
// in both masks (a null mask means "all valid").
// Errors: kDimensionMismatch, kEmptyRegion.
MetricReport Compare(const RasterImage& reference, const RasterImage& candidate,
                     const ValidityMask* candidate_mask, int crop_margin,
                     const ValidityMask* reference_mask = nullptr);

struct KappaPair {
  double k1 = 0.0;  // pix^-2
  double k2 = 0.0;  // pix^-4
};

// count values from start to end, geometrically spaced when `logarithmic`.
std::vector<double> MakeGrid(double start, double end, int count,
                             bool logarithmic);
// Pairs each k1' with k2' = k1' / 5.
std::vector<KappaPair> FifthRatioGrid(const std::vector<double>& k1_values);

struct SweepImage {
  std::string name;
  RasterImage image;
};

struct SweepConfig {
  int crop_margin = kDefaultCropMargin;
  NewtonConfig newton;  // mode is set per method
  RationalFitConfig fit;
  int threads = 0;
  // When positive, grid values are expressed for a canvas of this width and
  // rescaled per image (k1 by (ref/w)^2, k2 by (ref/w)^4) so that the
  // distortion geometry is the same at any resolution.
  int reference_width = 0;
  // Defaults to the image center.
  std::optional<DistortionCenter> center;
};

struct SweepFailure {
  std::string image;
  KappaPair kappa;
  MapMethod method;
  std::string message;
};

struct SweepSummaryRow {
  KappaPair kappa;
  MapMethod method;
  int image_count = 0;
  // sqrt of the mean of per-image rmse^2.
  double mean_rmse = 0.0;
  double mean_psnr = 0.0;  // from mean_rmse
  double mean_build_time_seconds = 0.0;
};

struct SweepResult {
  // (image, kappa, method) order; kappa values are the grid values.
  std::vector<MetricReport> cases;
  std::vector<SweepSummaryRow> summary;  // (kappa, method) order
  std::vector<SweepFailure> failures;
};

// For every image x kappa x method: distort with the inverse parameters,
// build the rectification map (timed), apply it and compare against the
// original. A failing case is recorded in `failures` and skipped.
// Throws kInvalidArgument for empty inputs or a method that needs forward
// parameters.
SweepResult RunSweep(const std::vector<SweepImage>& images,
                     const std::vector<KappaPair>& grid,
                     const std::vector<MapMethod>& methods,
                     const SweepConfig& config);

// Column headers are fixed:
//   cases:   image,kappa1_prime,kappa2_prime,method,rmse,psnr,
//            build_time_seconds,valid_pixel_count
//   summary: kappa1_prime,kappa2_prime,method,image_count,mean_rmse,
//            mean_psnr,mean_build_time_seconds
// An infinite PSNR is written as "inf".
void WriteCasesCsv(std::ostream& out, const SweepResult& result);
void WriteSummaryCsv(std::ostream& out, const SweepResult& result);

}  // namespace lensrect

#endif  // LENSRECT_EVALUATION_H_
