#include "lensrect/inverse_approximation.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lensrect/error.h"

namespace lensrect {
namespace {

constexpr double kMinDerivative = 1e-12;

// Streaming linear least squares for a fixed number of unknowns. Rows are
// buffered and folded into an upper-triangular factor of [A | b] with
// Householder QR, so memory stays O(block) and the normal equations are
// never formed.
class QrAccumulator {
 public:
  static constexpr int kUnknowns = 6;
  static constexpr int kCols = kUnknowns + 1;
  using Row = Eigen::Matrix<double, 1, kCols>;

  QrAccumulator() : buffer_(kBlockRows + kCols, kCols) {
    buffer_.setZero();
  }

  void AddRow(const std::array<double, kUnknowns>& a, double b) {
    for (int j = 0; j < kUnknowns; ++j) buffer_(kCols + pending_, j) = a[j];
    buffer_(kCols + pending_, kUnknowns) = b;
    if (++pending_ == kBlockRows) Fold();
  }

  // Column-equilibrated solve. Returns false if the system is rank deficient.
  bool Solve(std::array<double, kUnknowns>* x) {
    Fold();
    const Eigen::Matrix<double, kCols, kCols> r =
        buffer_.topRows(kCols).triangularView<Eigen::Upper>();
    Eigen::Matrix<double, kUnknowns, kUnknowns> a = r.topLeftCorner(
        kUnknowns, kUnknowns);
    const Eigen::Matrix<double, kUnknowns, 1> b =
        r.topRightCorner(kUnknowns, 1);
    // QR preserves column norms, so these are the norms of the columns of A.
    Eigen::Matrix<double, kUnknowns, 1> scale;
    for (int j = 0; j < kUnknowns; ++j) {
      scale(j) = a.col(j).norm();
      if (!(scale(j) > 0.0) || !std::isfinite(scale(j))) return false;
      a.col(j) /= scale(j);
    }
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, kUnknowns, kUnknowns>>
        qr(a);
    qr.setThreshold(1e-13);
    if (qr.rank() < kUnknowns) return false;
    const Eigen::Matrix<double, kUnknowns, 1> y = qr.solve(b);
    for (int j = 0; j < kUnknowns; ++j) {
      (*x)[j] = y(j) / scale(j);
      if (!std::isfinite((*x)[j])) return false;
    }
    return true;
  }

 private:
  static constexpr int kBlockRows = 2048;

  void Fold() {
    if (pending_ == 0) return;
    const int rows = kCols + pending_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(buffer_.topRows(rows));
    const Eigen::MatrixXd& packed = qr.matrixQR();
    buffer_.setZero();
    for (int i = 0; i < kCols; ++i) {
      for (int j = i; j < kCols; ++j) buffer_(i, j) = packed(i, j);
    }
    pending_ = 0;
  }

  Eigen::MatrixXd buffer_;
  int pending_ = 0;
};

// One distorted/undistorted correspondence, radius scaled to [0, 1].
struct Sample {
  NormalizedPoint distorted;
  NormalizedPoint undistorted;
  double q = 0.0;  // r_u^2 / radius_scale
};

template <typename Fn>
void ForEachSample(const RadialPolyParams& inverse, int width, int height,
                   int stride, double radius_scale, Fn&& fn) {
  for (int j = 0; j < height; j += stride) {
    for (int i = 0; i < width; i += stride) {
      Sample s;
      s.distorted = Normalize({double(i), double(j)}, inverse.center);
      s.undistorted = MapPoint(s.distorted, inverse);
      s.q = s.undistorted.SquaredRadius() / radius_scale;
      fn(s);
    }
  }
}

// Coefficients in the scaled variable q = r^2 / radius_scale.
using Scaled = std::array<double, 6>;

double ScaledNumerator(const Scaled& b, double q) {
  return q * (b[0] + q * (b[1] + q * (b[2] + q * b[3])));
}
double ScaledDenominator(const Scaled& b, double q) {
  return 1.0 + q * (4.0 * b[4] + 6.0 * b[5] * q);
}

bool ScaledDenominatorPositive(const Scaled& b) {
  // 1 + 4 b5 q + 6 b6 q^2 on q in [0, 1]: check endpoints and the vertex.
  if (!(ScaledDenominator(b, 1.0) > 0.0)) return false;
  if (b[5] != 0.0) {
    const double vertex = -4.0 * b[4] / (12.0 * b[5]);
    if (vertex > 0.0 && vertex < 1.0 && !(ScaledDenominator(b, vertex) > 0.0))
      return false;
  }
  return true;
}

// Sum of squared point residuals; +inf if a denominator is not positive.
double SumSquaredResidual(const RadialPolyParams& inverse, int width,
                          int height, int stride, double radius_scale,
                          const Scaled& b) {
  double sum = 0.0;
  bool ok = true;
  ForEachSample(inverse, width, height, stride, radius_scale,
                [&](const Sample& s) {
                  const double dn = ScaledDenominator(b, s.q);
                  if (!(dn > 0.0)) ok = false;
                  const double g = ScaledNumerator(b, s.q) / dn;
                  const double ex =
                      s.undistorted.x - s.undistorted.x * g - s.distorted.x;
                  const double ey =
                      s.undistorted.y - s.undistorted.y * g - s.distorted.y;
                  sum += ex * ex + ey * ey;
                });
  return ok ? sum : std::numeric_limits<double>::infinity();
}

Scaled ToScaled(const std::array<double, 6>& alpha, double radius_scale) {
  const double s = radius_scale;
  return {alpha[0] * s, alpha[1] * s * s, alpha[2] * s * s * s,
          alpha[3] * s * s * s * s, alpha[4] * s, alpha[5] * s * s};
}

std::array<double, 6> FromScaled(const Scaled& b, double radius_scale) {
  const double s = radius_scale;
  return {b[0] / s, b[1] / (s * s), b[2] / (s * s * s),
          b[3] / (s * s * s * s), b[4] / s, b[5] / (s * s)};
}

}  // namespace

NewtonResult TryNewtonInvertRadius(double undistorted_radius,
                                   const RadialPolyParams& inverse,
                                   const NewtonConfig& config) {
  const double ru = undistorted_radius;
  const double k1 = inverse.k1;
  const double k2 = inverse.k2;
  auto f = [&](double r) { return r + k1 * r * r * r + k2 * r * r * r * r * r - ru; };
  auto df = [&](double r) {
    const double r2 = r * r;
    return 1.0 + 3.0 * k1 * r2 + 5.0 * k2 * r2 * r2;
  };

  NewtonResult result;
  result.radius = ru;
  double value = f(ru);

  if (config.mode == NewtonMode::kSingleIteration) {
    const double slope = df(ru);
    if (std::abs(slope) < kMinDerivative) {
      result.residual = std::abs(value);
      result.status = NewtonStatus::kDegenerateDerivative;
      return result;
    }
    result.radius = ru - value / slope;
    result.iterations = 1;
    result.residual = std::abs(f(result.radius));
    result.status = std::isfinite(result.radius) ? NewtonStatus::kConverged
                                                 : NewtonStatus::kDiverged;
    return result;
  }

  while (true) {
    result.residual = std::abs(value);
    if (!std::isfinite(value)) {
      result.status = NewtonStatus::kDiverged;
      return result;
    }
    if (result.residual < config.tolerance) {
      result.status = NewtonStatus::kConverged;
      return result;
    }
    if (result.iterations >= config.max_iterations) {
      result.status = NewtonStatus::kDiverged;
      return result;
    }
    const double slope = df(result.radius);
    if (std::abs(slope) < kMinDerivative) {
      result.status = NewtonStatus::kDegenerateDerivative;
      return result;
    }
    result.radius -= value / slope;
    ++result.iterations;
    value = f(result.radius);
  }
}

NewtonResult NewtonInvertRadius(double undistorted_radius,
                                const RadialPolyParams& inverse,
                                const NewtonConfig& config) {
  RequireDirection(inverse, ModelDirection::kInverse, "Newton inversion");
  if (!(undistorted_radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "Newton inversion requires a non-negative radius");
  }
  const NewtonResult result =
      TryNewtonInvertRadius(undistorted_radius, inverse, config);
  switch (result.status) {
    case NewtonStatus::kConverged:
      return result;
    case NewtonStatus::kDiverged:
      throw Error(ErrorCode::kDivergence,
                  "Newton inversion did not converge for r_u=" +
                      std::to_string(undistorted_radius) + " after " +
                      std::to_string(result.iterations) + " iterations");
    case NewtonStatus::kDegenerateDerivative:
      throw Error(ErrorCode::kDegenerateDerivative,
                  "Newton inversion hit a vanishing derivative for r_u=" +
                      std::to_string(undistorted_radius));
  }
  return result;
}

NormalizedPoint NewtonMapPoint(const NormalizedPoint& undistorted,
                               const RadialPolyParams& inverse,
                               const NewtonConfig& config) {
  const double ru = undistorted.Radius();
  if (ru == 0.0) {
    RequireDirection(inverse, ModelDirection::kInverse, "Newton inversion");
    return undistorted;
  }
  const double rd = NewtonInvertRadius(ru, inverse, config).radius;
  const double s = rd / ru;
  return {undistorted.x * s, undistorted.y * s};
}

NormalizedPoint RationalMapPoint(const NormalizedPoint& p,
                                 const RationalInverseParams& params) {
  const double r2 = p.SquaredRadius();
  const double dn = params.Denominator(r2);
  if (!(dn > 0.0)) {
    throw Error(ErrorCode::kDenominatorSign,
                "rational model denominator is not positive at r=" +
                    std::to_string(std::sqrt(r2)));
  }
  const double g = params.Numerator(r2) / dn;
  return {p.x - p.x * g, p.y - p.y * g};
}

bool DenominatorPositiveOn(const RationalInverseParams& params,
                           double max_radius) {
  if (!(max_radius > 0.0)) return true;  // D(0) = 1
  const double scale = max_radius * max_radius;
  return ScaledDenominatorPositive(ToScaled(params.alpha, scale));
}

RationalFit FitRationalInverse(const RadialPolyParams& inverse, int width,
                               int height, const RationalFitConfig& config) {
  RequireDirection(inverse, ModelDirection::kInverse, "rational fit");
  if (config.stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "fit stride must be >= 1");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "fit domain must be nonempty");
  }

  RationalFit fit;
  fit.params.center = inverse.center;

  // Pass 1: sample count, radius range and whether the mapping moves at all.
  double max_r2 = 0.0;
  double max_shift = 0.0;
  ForEachSample(inverse, width, height, config.stride, 1.0,
                [&](const Sample& s) {
                  ++fit.sample_count;
                  max_r2 = std::max(max_r2, s.q);
                  max_shift = std::max(
                      {max_shift, std::abs(s.undistorted.x - s.distorted.x),
                       std::abs(s.undistorted.y - s.distorted.y)});
                });
  fit.max_radius = std::sqrt(max_r2);
  if (max_shift == 0.0) {
    // The identity is exactly representable with all coefficients zero.
    fit.residual_history.push_back(0.0);
    return fit;
  }
  const double radius_scale = std::max(max_r2, 1.0);
  const int stride = config.stride;
  const double n = fit.sample_count;

  // Linearized problem: multiplying through by the denominator makes the
  // model linear in the coefficients.
  Scaled b{};
  {
    QrAccumulator acc;
    ForEachSample(inverse, width, height, stride, radius_scale,
                  [&](const Sample& s) {
                    const double q = s.q;
                    const double coords[2][2] = {
                        {s.undistorted.x, s.distorted.x},
                        {s.undistorted.y, s.distorted.y}};
                    for (const auto& c : coords) {
                      const double pu = c[0];
                      const double d = c[0] - c[1];
                      acc.AddRow({pu * q, pu * q * q, pu * q * q * q,
                                  pu * q * q * q * q, -4.0 * q * d,
                                  -6.0 * q * q * d},
                                 d);
                    }
                  });
    if (!acc.Solve(&b)) {
      throw Error(ErrorCode::kFitDegenerate,
                  "rational fit: linearized system is singular");
    }
  }

  double sse =
      SumSquaredResidual(inverse, width, height, stride, radius_scale, b);
  if (!std::isfinite(sse) || !ScaledDenominatorPositive(b)) {
    // Warm start from the pure polynomial part instead (denominator = 1).
    QrAccumulator acc;
    ForEachSample(inverse, width, height, stride, radius_scale,
                  [&](const Sample& s) {
                    const double q = s.q;
                    acc.AddRow({s.undistorted.x * q, s.undistorted.x * q * q,
                                s.undistorted.x * q * q * q,
                                s.undistorted.x * q * q * q * q, 0.0, 0.0},
                               s.undistorted.x - s.distorted.x);
                    acc.AddRow({s.undistorted.y * q, s.undistorted.y * q * q,
                                s.undistorted.y * q * q * q,
                                s.undistorted.y * q * q * q * q, 0.0, 0.0},
                               s.undistorted.y - s.distorted.y);
                  });
    // The two zero columns make the full system singular; solve the 4x4 part
    // by giving the denominator columns a unit diagonal.
    acc.AddRow({0, 0, 0, 0, 1, 0}, 0.0);
    acc.AddRow({0, 0, 0, 0, 0, 1}, 0.0);
    if (!acc.Solve(&b)) {
      throw Error(ErrorCode::kFitDegenerate,
                  "rational fit: polynomial warm start is singular");
    }
    sse = SumSquaredResidual(inverse, width, height, stride, radius_scale, b);
  }
  fit.residual_history.push_back(std::sqrt(sse / n));

  // Damped Gauss-Newton on the rational residual. Steps are only accepted
  // when they lower the residual, so the history is non-increasing.
  for (int iter = 0; iter < config.refinement_iterations; ++iter) {
    QrAccumulator acc;
    ForEachSample(
        inverse, width, height, stride, radius_scale, [&](const Sample& s) {
          const double q = s.q;
          const double dn = ScaledDenominator(b, q);
          const double num = ScaledNumerator(b, q);
          const double g = num / dn;
          const double coords[2][2] = {{s.undistorted.x, s.distorted.x},
                                       {s.undistorted.y, s.distorted.y}};
          for (const auto& c : coords) {
            const double pu = c[0];
            const double e = pu - pu * g - c[1];
            const double a = -pu / dn;
            const double t = pu * num / (dn * dn);
            acc.AddRow({a * q, a * q * q, a * q * q * q, a * q * q * q * q,
                        t * 4.0 * q, t * 6.0 * q * q},
                       -e);
          }
        });
    Scaled step{};
    if (!acc.Solve(&step)) break;

    bool accepted = false;
    double damping = 1.0;
    for (int halving = 0; halving < 12; ++halving, damping *= 0.5) {
      Scaled trial = b;
      for (int k = 0; k < 6; ++k) trial[k] += damping * step[k];
      if (!ScaledDenominatorPositive(trial)) continue;
      const double trial_sse = SumSquaredResidual(inverse, width, height,
                                                  stride, radius_scale, trial);
      if (trial_sse < sse) {
        const double change = (sse - trial_sse) / sse;
        b = trial;
        sse = trial_sse;
        fit.residual_history.push_back(std::sqrt(sse / n));
        accepted = change >= config.relative_change_tolerance;
        break;
      }
    }
    if (!accepted) break;
  }

  fit.params.alpha = FromScaled(b, radius_scale);
  fit.rms_residual = std::sqrt(sse / n);
  if (!ScaledDenominatorPositive(b)) {
    throw Error(ErrorCode::kDenominatorSign,
                "rational fit: denominator is not positive over the sampled "
                "radius range");
  }
  return fit;
}

}  // namespace lensrect
