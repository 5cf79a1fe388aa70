#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lensrect/distortion_model.h"
#include "lensrect/error.h"
#include "lensrect/evaluation.h"
#include "lensrect/image_io.h"
#include "lensrect/inverse_approximation.h"
#include "lensrect/map_io.h"
#include "lensrect/rectification.h"

namespace lensrect::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for invalid flag values/combinations; maps to exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::vector<double> center;  // empty = image center
  int threads = 0;
};

struct DistortFlags {
  std::string input;
  std::string output;
  double k1p = 0.0;
  double k2p = 0.0;
};

struct BuildMapFlags {
  std::string method;
  std::optional<double> k1p, k2p, k1, k2;
  std::vector<double> alpha;
  int width = 0;
  int height = 0;
  int src_width = 0;
  int src_height = 0;
  double newton_tol = NewtonConfig{}.tolerance;
  int newton_max_iters = NewtonConfig{}.max_iterations;
  int stride = 1;
  std::string output;
};

struct RectifyFlags {
  std::string map_path;
  std::vector<std::string> inputs;
  std::string output;
  std::string out_dir;
};

struct FitFlags {
  double k1p = 0.0;
  double k2p = 0.0;
  int width = 0;
  int height = 0;
  int stride = 1;
  std::string output;
};

struct SweepFlags {
  std::string image_dir;
  std::string grid = "1e-13:1e-11:9:log";
  std::string methods = "newton1,newton,rational,triangulation";
  int crop = kDefaultCropMargin;
  int stride = 1;
  double newton_tol = NewtonConfig{}.tolerance;
  int newton_max_iters = NewtonConfig{}.max_iterations;
  int reference_width = 0;
  std::string out_dir;
};

DistortionCenter ResolveCenter(const CommonFlags& common, int width,
                               int height) {
  if (common.center.empty()) return DistortionCenter::ImageCenter(width, height);
  return {common.center[0], common.center[1]};
}

std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double ParseDouble(const std::string& text, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": cannot parse '" + text + "' as a number");
  }
}

// "start:end:count:log|lin" or a comma-separated list of values.
std::vector<double> ParseGrid(const std::string& spec) {
  if (spec.find(':') == std::string::npos) {
    std::vector<double> values;
    for (const auto& v : SplitList(spec, ',')) {
      values.push_back(ParseDouble(v, "--grid"));
    }
    if (values.empty()) throw UsageError("--grid: no values given");
    return values;
  }
  const auto parts = SplitList(spec, ':');
  if (parts.size() != 4 || (parts[3] != "log" && parts[3] != "lin")) {
    throw UsageError("--grid: expected start:end:count:log|lin, got '" +
                     spec + "'");
  }
  const double start = ParseDouble(parts[0], "--grid");
  const double end = ParseDouble(parts[1], "--grid");
  const int count = static_cast<int>(ParseDouble(parts[2], "--grid"));
  if (count < 1) throw UsageError("--grid: count must be >= 1");
  if (parts[3] == "log" && !(start > 0 && end > 0)) {
    throw UsageError("--grid: logarithmic grids need positive endpoints");
  }
  return MakeGrid(start, end, count, parts[3] == "log");
}

std::vector<MapMethod> ParseMethods(const std::string& text) {
  std::vector<MapMethod> methods;
  for (const auto& name : SplitList(text, ',')) {
    const auto m = ParseMapMethod(name);
    if (!m) throw UsageError("--methods: unknown method '" + name + "'");
    methods.push_back(*m);
  }
  if (methods.empty()) throw UsageError("--methods: no methods given");
  return methods;
}

std::string FormatSeconds(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << s;
  return os.str();
}

// ---------------------------------------------------------------- distort

int RunDistort(const DistortFlags& f, const CommonFlags& common,
               std::ostream& out) {
  const RasterImage input = ReadImage(f.input);
  const DistortionCenter center =
      ResolveCenter(common, input.width(), input.height());
  const RadialPolyParams inverse =
      RadialPolyParams::Inverse(f.k1p, f.k2p, center);
  const MaskedImage distorted =
      ApplySyntheticDistortion(input, inverse, common.threads);
  WriteImage(f.output, distorted.image);
  const std::string mask_path = MaskPathFor(f.output);
  WriteMask(mask_path, distorted.mask);
  const double corner = CornerRadius(input.width(), input.height(), center);
  out << "wrote " << f.output << " and " << mask_path << "\n"
      << "corner radius " << corner << " px maps to "
      << inverse.MapRadius(corner) << " px (expansion factor "
      << inverse.ScaleFactor(corner * corner) << ")\n"
      << "valid pixels " << distorted.mask.CountValid() << " of "
      << input.pixel_count() << "\n";
  return 0;
}

// -------------------------------------------------------------- build-map

RectificationMap BuildRequestedMap(const BuildMapFlags& f,
                                   const CommonFlags& common,
                                   std::ostream& out) {
  const auto method = ParseMapMethod(f.method);
  if (!method) throw UsageError("--method: unknown method '" + f.method + "'");
  if (f.width <= 0 || f.height <= 0) {
    throw UsageError("--width/--height must be positive");
  }
  const ImageSize out_size{f.width, f.height};
  const ImageSize src_size{f.src_width > 0 ? f.src_width : f.width,
                           f.src_height > 0 ? f.src_height : f.height};
  const DistortionCenter center = ResolveCenter(common, f.width, f.height);
  const bool has_forward = f.k1 || f.k2;
  const bool has_inverse = f.k1p || f.k2p;
  const MapBuildOptions options{common.threads};

  if (*method == MapMethod::kForwardBilinear) {
    if (has_inverse) {
      throw UsageError(
          "direction mismatch: method 'forward' needs forward parameters "
          "(--k1/--k2), got inverse parameters (--k1p/--k2p)");
    }
    return BuildMapForward(
        RadialPolyParams::Forward(f.k1.value_or(0), f.k2.value_or(0), center),
        out_size, src_size, options);
  }
  if (has_forward) {
    throw UsageError("direction mismatch: method '" + f.method +
                     "' needs inverse parameters (--k1p/--k2p), got forward "
                     "parameters (--k1/--k2)");
  }
  const RadialPolyParams inverse = RadialPolyParams::Inverse(
      f.k1p.value_or(0), f.k2p.value_or(0), center);
  switch (*method) {
    case MapMethod::kNewtonSingle:
    case MapMethod::kNewtonConverged: {
      if (f.newton_tol <= 0) throw UsageError("--newton-tol must be > 0");
      if (f.newton_max_iters < 1) {
        throw UsageError("--newton-max-iters must be >= 1");
      }
      NewtonConfig cfg{f.newton_max_iters, f.newton_tol,
                       *method == MapMethod::kNewtonSingle
                           ? NewtonMode::kSingleIteration
                           : NewtonMode::kToConvergence};
      RectificationMap map =
          BuildMapNewton(inverse, cfg, out_size, src_size, options);
      if (map.failed_count > 0) {
        out << "warning: Newton did not converge for " << map.failed_count
            << " pixels (marked invalid)\n";
      }
      return map;
    }
    case MapMethod::kRationalBilinear: {
      if (!f.alpha.empty()) {
        if (has_inverse) {
          throw UsageError("--alpha and --k1p/--k2p are mutually exclusive");
        }
        RationalInverseParams params;
        std::copy(f.alpha.begin(), f.alpha.end(), params.alpha.begin());
        params.center = center;
        return BuildMapRational(params, out_size, src_size, options);
      }
      if (f.stride < 1) throw UsageError("--stride must be >= 1");
      RationalFitConfig cfg;
      cfg.stride = f.stride;
      const RationalFit fit =
          FitRationalInverse(inverse, src_size.width, src_size.height, cfg);
      out << "fitted rational model, rms residual " << fit.rms_residual
          << " px\n";
      RectificationMap map =
          BuildMapRational(fit.params, out_size, src_size, options);
      map.provenance["fit_rms_residual"] = fit.rms_residual;
      map.provenance["fit_stride"] = f.stride;
      map.provenance["inverse_params"] = {{"k1", inverse.k1},
                                          {"k2", inverse.k2}};
      return map;
    }
    case MapMethod::kTriangulationLinear:
      return BuildMapTriangulation(inverse, out_size, src_size, options);
    case MapMethod::kForwardBilinear:
      break;
  }
  throw UsageError("unsupported method");
}

int RunBuildMap(const BuildMapFlags& f, const CommonFlags& common,
                std::ostream& out) {
  if (!f.alpha.empty() && f.method != "rational") {
    throw UsageError("--alpha is only valid with --method rational");
  }
  const auto start = std::chrono::steady_clock::now();
  const RectificationMap map = BuildRequestedMap(f, common, out);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  SaveMap(f.output, map);
  out << "wrote " << f.output << " (" << MapMethodName(map.method) << ", "
      << map.CountValid() << " of " << map.entries.size()
      << " entries valid)\n"
      << "build time " << FormatSeconds(seconds) << " s\n";
  return 0;
}

// ---------------------------------------------------------------- rectify

int RunRectify(const RectifyFlags& f, const CommonFlags& common,
               std::ostream& out) {
  if (f.inputs.size() > 1 && f.out_dir.empty()) {
    throw UsageError("--out-dir is required when rectifying several images");
  }
  if (f.inputs.size() == 1 && f.out_dir.empty() && f.output.empty()) {
    throw UsageError("--out or --out-dir is required");
  }
  const RectificationMap map = LoadMap(f.map_path);
  out << "loaded map " << f.map_path << " (" << MapMethodName(map.method)
      << ")\n";
  for (const std::string& input_path : f.inputs) {
    const RasterImage input = ReadImage(input_path);
    std::optional<ValidityMask> input_mask;
    if (fs::exists(MaskPathFor(input_path))) {
      input_mask = ReadMask(MaskPathFor(input_path));
    }
    const MaskedImage rectified = ApplyMap(
        map, input, input_mask ? &*input_mask : nullptr, common.threads);
    std::string output = f.output;
    if (!f.out_dir.empty()) {
      fs::create_directories(f.out_dir);
      const fs::path in(input_path);
      output = (fs::path(f.out_dir) / in.stem()).string() +
               in.extension().string();
    }
    WriteImage(output, rectified.image);
    WriteMask(MaskPathFor(output), rectified.mask);
    out << "wrote " << output << "\n";
  }
  return 0;
}

// -------------------------------------------------------------------- fit

int RunFit(const FitFlags& f, const CommonFlags& common, std::ostream& out) {
  if (f.stride < 1) throw UsageError("--stride must be >= 1");
  if (f.width <= 0 || f.height <= 0) {
    throw UsageError("--width/--height must be positive");
  }
  const DistortionCenter center = ResolveCenter(common, f.width, f.height);
  RationalFitConfig cfg;
  cfg.stride = f.stride;
  const RationalFit fit = FitRationalInverse(
      RadialPolyParams::Inverse(f.k1p, f.k2p, center), f.width, f.height, cfg);
  nlohmann::json doc = {
      {"alpha", fit.params.alpha},
      {"rms_residual", fit.rms_residual},
      {"residual_history", fit.residual_history},
      {"sample_count", fit.sample_count},
      {"max_radius", fit.max_radius},
      {"center", {{"cx", center.cx}, {"cy", center.cy}}},
      {"k1p", f.k1p},
      {"k2p", f.k2p},
      {"width", f.width},
      {"height", f.height},
      {"stride", f.stride}};
  std::ofstream file(f.output);
  if (!file) throw Error(ErrorCode::kIo, "cannot write '" + f.output + "'");
  file << doc.dump(2) << "\n";
  if (!file) throw Error(ErrorCode::kIo, "failed writing '" + f.output + "'");
  out << "wrote " << f.output << ", rms residual " << fit.rms_residual
      << " px over " << fit.sample_count << " samples\n";
  return 0;
}

// ------------------------------------------------------------------ sweep

int RunSweepCommand(const SweepFlags& f, const CommonFlags& common,
                    std::ostream& out, std::ostream& err) {
  const std::vector<double> k1_values = ParseGrid(f.grid);
  const std::vector<MapMethod> methods = ParseMethods(f.methods);
  for (MapMethod m : methods) {
    if (m == MapMethod::kForwardBilinear) {
      throw UsageError(
          "--methods: 'forward' needs forward parameters, which the sweep "
          "does not have");
    }
  }
  if (f.crop < 0) throw UsageError("--crop must be >= 0");
  if (f.stride < 1) throw UsageError("--stride must be >= 1");
  if (!fs::is_directory(f.image_dir)) {
    throw Error(ErrorCode::kIo, "'" + f.image_dir + "' is not a directory");
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(f.image_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file()) continue;
    if (name.size() > 9 && name.ends_with(".mask.pgm")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SweepImage> images;
  for (const fs::path& p : files) {
    try {
      images.push_back({p.filename().string(), ReadImage(p.string())});
    } catch (const Error& e) {
      err << "skipping " << p.string() << ": " << e.what() << "\n";
    }
  }
  if (images.empty()) {
    throw Error(ErrorCode::kIo,
                "no readable images in '" + f.image_dir + "'");
  }

  SweepConfig config;
  config.crop_margin = f.crop;
  config.threads = common.threads;
  config.fit.stride = f.stride;
  config.newton.tolerance = f.newton_tol;
  config.newton.max_iterations = f.newton_max_iters;
  config.reference_width = f.reference_width;
  if (!common.center.empty()) {
    config.center = DistortionCenter{common.center[0], common.center[1]};
  }
  const SweepResult result =
      RunSweep(images, FifthRatioGrid(k1_values), methods, config);
  for (const SweepFailure& failure : result.failures) {
    err << "case failed: " << failure.image << " k1'=" << failure.kappa.k1
        << " " << MapMethodName(failure.method) << ": " << failure.message
        << "\n";
  }

  fs::create_directories(f.out_dir);
  const fs::path cases_path = fs::path(f.out_dir) / "cases.csv";
  const fs::path summary_path = fs::path(f.out_dir) / "summary.csv";
  {
    std::ofstream cases(cases_path);
    if (!cases) throw Error(ErrorCode::kIo, "cannot write " + cases_path.string());
    WriteCasesCsv(cases, result);
  }
  {
    std::ofstream summary(summary_path);
    if (!summary) {
      throw Error(ErrorCode::kIo, "cannot write " + summary_path.string());
    }
    WriteSummaryCsv(summary, result);
  }

  out << "mean PSNR (dB) over " << images.size() << " image(s)\n";
  out << std::setw(14) << "k1'";
  for (MapMethod m : methods) out << std::setw(15) << MapMethodName(m);
  out << "\n";
  for (double k1 : k1_values) {
    out << std::setw(14) << std::setprecision(4) << k1;
    for (MapMethod m : methods) {
      auto it = std::find_if(result.summary.begin(), result.summary.end(),
                             [&](const SweepSummaryRow& r) {
                               return r.kappa.k1 == k1 && r.method == m;
                             });
      if (it == result.summary.end()) {
        out << std::setw(15) << "-";
      } else {
        out << std::setw(15) << std::fixed << std::setprecision(2)
            << it->mean_psnr << std::defaultfloat;
      }
    }
    out << "\n";
  }
  out << "wrote " << cases_path.string() << " and " << summary_path.string()
      << "\n";
  return 0;
}

void AddCommonFlags(CLI::App* cmd, CommonFlags* common) {
  cmd->add_option("--center", common->center,
                  "Distortion center X,Y in pixels (default: image center)")
      ->delimiter(',')
      ->expected(2);
  cmd->add_option("--threads", common->threads,
                  "Worker threads (0 = available parallelism)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Lens distortion rectification toolkit", "lensrect"};
  app.require_subcommand(1);

  CommonFlags common;

  DistortFlags distort;
  CLI::App* distort_cmd = app.add_subcommand(
      "distort", "Apply synthetic distortion from inverse parameters");
  distort_cmd->add_option("input", distort.input, "Input image (PNG/PGM/PPM)")
      ->required();
  distort_cmd->add_option("--k1p", distort.k1p, "Inverse k1' [pix^-2]");
  distort_cmd->add_option("--k2p", distort.k2p, "Inverse k2' [pix^-4]");
  distort_cmd->add_option("--out", distort.output, "Output image")->required();
  AddCommonFlags(distort_cmd, &common);

  BuildMapFlags build;
  CLI::App* build_cmd =
      app.add_subcommand("build-map", "Build and save a rectification map");
  build_cmd
      ->add_option("--method", build.method,
                   "forward, newton1, newton, rational or triangulation")
      ->required();
  build_cmd->add_option("--k1p", build.k1p, "Inverse k1' [pix^-2]");
  build_cmd->add_option("--k2p", build.k2p, "Inverse k2' [pix^-4]");
  build_cmd->add_option("--k1", build.k1, "Forward k1 [pix^-2]");
  build_cmd->add_option("--k2", build.k2, "Forward k2 [pix^-4]");
  build_cmd->add_option("--alpha", build.alpha,
                        "Rational coefficients a1,...,a6 (method rational)")
      ->delimiter(',')
      ->expected(6);
  build_cmd->add_option("--width", build.width, "Output width")->required();
  build_cmd->add_option("--height", build.height, "Output height")->required();
  build_cmd->add_option("--src-width", build.src_width,
                        "Source width (default: output width)");
  build_cmd->add_option("--src-height", build.src_height,
                        "Source height (default: output height)");
  build_cmd->add_option("--newton-tol", build.newton_tol,
                        "Newton tolerance on |f(r_d)| [pix]");
  build_cmd->add_option("--newton-max-iters", build.newton_max_iters,
                        "Newton iteration cap");
  build_cmd->add_option("--stride", build.stride,
                        "Sampling stride for the rational fit");
  build_cmd->add_option("--out", build.output, "Map file")->required();
  AddCommonFlags(build_cmd, &common);

  RectifyFlags rectify;
  CLI::App* rectify_cmd =
      app.add_subcommand("rectify", "Apply a saved map to one or more images");
  rectify_cmd->add_option("--map", rectify.map_path, "Map file")->required();
  rectify_cmd->add_option("inputs", rectify.inputs, "Input images")
      ->required();
  rectify_cmd->add_option("--out", rectify.output, "Output image");
  rectify_cmd->add_option("--out-dir", rectify.out_dir,
                          "Output directory (several inputs)");
  AddCommonFlags(rectify_cmd, &common);

  FitFlags fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit the rational forward approximation");
  fit_cmd->add_option("--k1p", fit.k1p, "Inverse k1' [pix^-2]");
  fit_cmd->add_option("--k2p", fit.k2p, "Inverse k2' [pix^-4]");
  fit_cmd->add_option("--width", fit.width, "Image width")->required();
  fit_cmd->add_option("--height", fit.height, "Image height")->required();
  fit_cmd->add_option("--stride", fit.stride, "Sampling stride in pixels");
  fit_cmd->add_option("--out", fit.output, "Output JSON")->required();
  AddCommonFlags(fit_cmd, &common);

  SweepFlags sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Run the synthetic-distortion comparison");
  sweep_cmd->add_option("--images", sweep.image_dir, "Directory of images")
      ->required();
  sweep_cmd->add_option("--grid", sweep.grid,
                        "k1' values: start:end:count:log|lin or a list "
                        "(k2' = k1'/5)");
  sweep_cmd->add_option("--methods", sweep.methods,
                        "Comma-separated methods");
  sweep_cmd->add_option("--crop", sweep.crop, "Border crop in pixels");
  sweep_cmd->add_option("--stride", sweep.stride, "Rational fit stride");
  sweep_cmd->add_option("--newton-tol", sweep.newton_tol,
                        "Newton tolerance on |f(r_d)| [pix]");
  sweep_cmd->add_option("--newton-max-iters", sweep.newton_max_iters,
                        "Newton iteration cap");
  sweep_cmd->add_option("--reference-width", sweep.reference_width,
                        "Canvas width the grid values refer to (rescaled per "
                        "image; 0 = none)");
  sweep_cmd->add_option("--out", sweep.out_dir, "Output CSV directory")
      ->required();
  AddCommonFlags(sweep_cmd, &common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit cleanly; every other parse error is usage.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*distort_cmd) return RunDistort(distort, common, out);
    if (*build_cmd) return RunBuildMap(build, common, out);
    if (*rectify_cmd) return RunRectify(rectify, common, out);
    if (*fit_cmd) return RunFit(fit, common, out);
    if (*sweep_cmd) return RunSweepCommand(sweep, common, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lensrect::cli
