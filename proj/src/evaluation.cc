#include "lensrect/evaluation.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "lensrect/error.h"

namespace lensrect {
namespace {

std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

RectificationMap BuildForMethod(MapMethod method,
                                const RadialPolyParams& inverse,
                                ImageSize size, const SweepConfig& config) {
  const MapBuildOptions options{config.threads};
  switch (method) {
    case MapMethod::kNewtonSingle:
    case MapMethod::kNewtonConverged: {
      NewtonConfig newton = config.newton;
      newton.mode = method == MapMethod::kNewtonSingle
                        ? NewtonMode::kSingleIteration
                        : NewtonMode::kToConvergence;
      return BuildMapNewton(inverse, newton, size, size, options);
    }
    case MapMethod::kRationalBilinear: {
      const RationalFit fit =
          FitRationalInverse(inverse, size.width, size.height, config.fit);
      RectificationMap map =
          BuildMapRational(fit.params, size, size, options);
      map.provenance["fit_rms_residual"] = fit.rms_residual;
      return map;
    }
    case MapMethod::kTriangulationLinear:
      return BuildMapTriangulation(inverse, size, size, options);
    case MapMethod::kForwardBilinear:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "the sweep only knows inverse parameters; method '" +
                  std::string(MapMethodName(method)) + "' needs forward ones");
}

}  // namespace

double PsnrFromRmse(double rmse) {
  if (rmse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(255.0 / rmse);
}

MetricReport Compare(const RasterImage& reference, const RasterImage& candidate,
                     const ValidityMask* candidate_mask, int crop_margin,
                     const ValidityMask* reference_mask) {
  if (!reference.SameShape(candidate)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "reference and candidate images differ in shape");
  }
  const int w = reference.width(), h = reference.height();
  for (const ValidityMask* m : {candidate_mask, reference_mask}) {
    if (m && (m->width != w || m->height != h)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "validity mask does not match the image size");
    }
  }
  if (crop_margin < 0) {
    throw Error(ErrorCode::kInvalidArgument, "crop margin must be >= 0");
  }
  double sum = 0.0;
  std::size_t count = 0;
  const int channels = reference.channels();
  for (int y = crop_margin; y < h - crop_margin; ++y) {
    for (int x = crop_margin; x < w - crop_margin; ++x) {
      if (candidate_mask && !candidate_mask->at(x, y)) continue;
      if (reference_mask && !reference_mask->at(x, y)) continue;
      for (int c = 0; c < channels; ++c) {
        const double d = double(candidate.at(x, y, c)) - reference.at(x, y, c);
        sum += d * d;
      }
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyRegion,
                "no pixels left to compare after masking and cropping");
  }
  MetricReport report;
  report.rmse = std::sqrt(sum / (double(count) * channels));
  report.psnr = PsnrFromRmse(report.rmse);
  report.crop_margin = crop_margin;
  report.valid_pixel_count = count;
  return report;
}

std::vector<double> MakeGrid(double start, double end, int count,
                             bool logarithmic) {
  if (count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one value");
  }
  if (logarithmic && !(start > 0.0 && end > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "logarithmic grid endpoints must be positive");
  }
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : double(i) / (count - 1);
    grid[i] = logarithmic
                  ? std::exp(std::log(start) + t * (std::log(end) - std::log(start)))
                  : start + t * (end - start);
  }
  // Pin the endpoints exactly.
  grid.front() = start;
  if (count > 1) grid.back() = end;
  return grid;
}

std::vector<KappaPair> FifthRatioGrid(const std::vector<double>& k1_values) {
  std::vector<KappaPair> grid;
  grid.reserve(k1_values.size());
  for (double k1 : k1_values) grid.push_back({k1, k1 / 5.0});
  return grid;
}

SweepResult RunSweep(const std::vector<SweepImage>& images,
                     const std::vector<KappaPair>& grid,
                     const std::vector<MapMethod>& methods,
                     const SweepConfig& config) {
  if (images.empty() || grid.empty() || methods.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sweep needs at least one image, grid value and method");
  }
  for (MapMethod m : methods) {
    if (m == MapMethod::kForwardBilinear) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the sweep only knows inverse parameters; method 'forward' "
                  "needs forward ones");
    }
  }

  SweepResult result;
  for (const SweepImage& item : images) {
    const RasterImage& original = item.image;
    const ImageSize size{original.width(), original.height()};
    const DistortionCenter center = config.center.value_or(
        DistortionCenter::ImageCenter(size.width, size.height));
    const double scale = config.reference_width > 0
                             ? double(config.reference_width) / size.width
                             : 1.0;
    for (const KappaPair& kappa : grid) {
      const RadialPolyParams inverse = RadialPolyParams::Inverse(
          kappa.k1 * scale * scale, kappa.k2 * scale * scale * scale * scale,
          center);
      MaskedImage distorted;
      try {
        distorted = ApplySyntheticDistortion(original, inverse, config.threads);
      } catch (const Error& e) {
        for (MapMethod m : methods) {
          result.failures.push_back({item.name, kappa, m, e.what()});
        }
        continue;
      }
      for (MapMethod method : methods) {
        try {
          const auto start = std::chrono::steady_clock::now();
          const RectificationMap map =
              BuildForMethod(method, inverse, size, config);
          const double seconds = std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
          const MaskedImage rectified =
              ApplyMap(map, distorted.image, &distorted.mask, config.threads);
          MetricReport report = Compare(original, rectified.image,
                                        &rectified.mask, config.crop_margin);
          report.image = item.name;
          report.method = method;
          report.kappa1_prime = kappa.k1;
          report.kappa2_prime = kappa.k2;
          report.build_time_seconds = seconds;
          result.cases.push_back(std::move(report));
        } catch (const Error& e) {
          result.failures.push_back({item.name, kappa, method, e.what()});
        }
      }
    }
  }

  for (const KappaPair& kappa : grid) {
    for (MapMethod method : methods) {
      SweepSummaryRow row{kappa, method};
      double sq = 0.0, time = 0.0;
      for (const MetricReport& r : result.cases) {
        if (r.method != method || r.kappa1_prime != kappa.k1 ||
            r.kappa2_prime != kappa.k2) {
          continue;
        }
        ++row.image_count;
        sq += r.rmse * r.rmse;
        time += r.build_time_seconds;
      }
      if (row.image_count == 0) continue;
      row.mean_rmse = std::sqrt(sq / row.image_count);
      row.mean_psnr = PsnrFromRmse(row.mean_rmse);
      row.mean_build_time_seconds = time / row.image_count;
      result.summary.push_back(row);
    }
  }
  return result;
}

void WriteCasesCsv(std::ostream& out, const SweepResult& result) {
  out << "image,kappa1_prime,kappa2_prime,method,rmse,psnr,"
         "build_time_seconds,valid_pixel_count\n";
  for (const MetricReport& r : result.cases) {
    out << r.image << ',' << FormatNumber(r.kappa1_prime) << ','
        << FormatNumber(r.kappa2_prime) << ',' << MapMethodName(r.method)
        << ',' << FormatNumber(r.rmse) << ',' << FormatNumber(r.psnr) << ','
        << FormatNumber(r.build_time_seconds) << ',' << r.valid_pixel_count
        << '\n';
  }
}

void WriteSummaryCsv(std::ostream& out, const SweepResult& result) {
  out << "kappa1_prime,kappa2_prime,method,image_count,mean_rmse,mean_psnr,"
         "mean_build_time_seconds\n";
  for (const SweepSummaryRow& r : result.summary) {
    out << FormatNumber(r.kappa.k1) << ',' << FormatNumber(r.kappa.k2) << ','
        << MapMethodName(r.method) << ',' << r.image_count << ','
        << FormatNumber(r.mean_rmse) << ',' << FormatNumber(r.mean_psnr)
        << ',' << FormatNumber(r.mean_build_time_seconds) << '\n';
  }
}

}  // namespace lensrect
