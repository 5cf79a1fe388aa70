// Generates the procedural test images bundled under data/test_images.
// Every image is supersampled 4x4 per pixel so edges are anti-aliased, and
// the generator is seeded so reruns reproduce the files byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lensrect/image_io.h"
#include "lensrect/raster_image.h"

namespace {

using lensrect::RasterImage;

struct Rgb {
  double r, g, b;
};

// Smooth lattice value noise in [0, 1].
class ValueNoise {
 public:
  explicit ValueNoise(unsigned seed) : table_(kSize * kSize) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : table_) v = u(rng);
  }

  double operator()(double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    const double tx = Smooth(x - fx), ty = Smooth(y - fy);
    const double a = At(ix, iy), b = At(ix + 1, iy);
    const double c = At(ix, iy + 1), d = At(ix + 1, iy + 1);
    return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
  }

  double Fbm(double x, double y, int octaves) const {
    double sum = 0.0, amp = 0.5, norm = 0.0;
    for (int o = 0; o < octaves; ++o) {
      sum += amp * (*this)(x, y);
      norm += amp;
      x = x * 2.03 + 17.1;
      y = y * 2.03 + 5.7;
      amp *= 0.55;
    }
    return sum / norm;
  }

 private:
  static constexpr int kSize = 256;
  static double Smooth(double t) { return t * t * (3 - 2 * t); }
  double At(int x, int y) const {
    return table_[((y & (kSize - 1)) * kSize) + (x & (kSize - 1))];
  }
  std::vector<double> table_;
};

RasterImage Render(int w, int h, const std::function<Rgb(double, double)>& f) {
  RasterImage img(w, h, 3);
  constexpr int kSub = 4;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const Rgb c = f(x + (sx + 0.5) / kSub - 0.5, y + (sy + 0.5) / kSub - 0.5);
          acc.r += c.r;
          acc.g += c.g;
          acc.b += c.b;
        }
      }
      const double n = kSub * kSub;
      img.at(x, y, 0) = static_cast<float>(std::clamp(acc.r / n, 0.0, 255.0));
      img.at(x, y, 1) = static_cast<float>(std::clamp(acc.g / n, 0.0, 255.0));
      img.at(x, y, 2) = static_cast<float>(std::clamp(acc.b / n, 0.0, 255.0));
    }
  }
  return img;
}

// Sky gradient, fractal hills, and a few hard-edged buildings.
RasterImage Landscape(int w, int h) {
  const ValueNoise noise(11);
  return Render(w, h, [&](double x, double y) -> Rgb {
    const double u = x / w, v = y / h;
    const double ridge = 0.45 + 0.18 * noise.Fbm(u * 6, 3.3, 5);
    if (v < ridge) {
      const double cloud = noise.Fbm(u * 10, v * 14, 6);
      const double t = v / ridge;
      return {90 + 80 * t + 60 * cloud, 140 + 60 * t + 50 * cloud,
              220 - 20 * t + 30 * cloud};
    }
    // Buildings: rectangles with window grids.
    for (int b = 0; b < 7; ++b) {
      const double left = 0.05 + 0.13 * b, right = left + 0.08;
      const double top = ridge - 0.05 - 0.04 * ((b * 37) % 5);
      if (u >= left && u < right && v >= top && v < ridge + 0.2) {
        const bool window = std::fmod((u - left) * w, 14.0) < 7.0 &&
                            std::fmod((v - top) * h, 18.0) < 9.0;
        return window ? Rgb{230, 210, 120} : Rgb{70 + 10.0 * b, 60, 55};
      }
    }
    const double grass = noise.Fbm(u * 40, v * 40, 6);
    return {40 + 70 * grass, 90 + 100 * grass, 30 + 40 * grass};
  });
}

// Checkerboard, discs and bar patterns of several spatial frequencies.
RasterImage Geometric(int w, int h) {
  return Render(w, h, [&](double x, double y) -> Rgb {
    const double u = x / w, v = y / h;
    if (u < 0.5 && v < 0.5) {
      const bool on = (int(std::floor(x / 24)) + int(std::floor(y / 24))) % 2;
      return on ? Rgb{240, 240, 235} : Rgb{25, 30, 35};
    }
    if (u >= 0.5 && v < 0.5) {
      const double period = 4.0 + 28.0 * (u - 0.5) * 2;
      const bool bar = std::fmod(y, period) < period / 2;
      return bar ? Rgb{200, 60, 40} : Rgb{250, 230, 200};
    }
    for (int i = 0; i < 6; ++i) {
      const double cx = w * (0.1 + 0.16 * i), cy = h * 0.75;
      const double r = 25 + 8 * i;
      if (std::hypot(x - cx, y - cy) < r) {
        return {40.0 * i, 255 - 35.0 * i, 120 + 20.0 * i};
      }
    }
    const double t = v * 2 - 1;
    return {60 + 100 * t, 80, 160 - 80 * t};
  });
}

// Fabric-like oriented gratings modulated by fractal noise.
RasterImage Texture(int w, int h) {
  const ValueNoise noise(29);
  return Render(w, h, [&](double x, double y) -> Rgb {
    const double n = noise.Fbm(x / 90.0, y / 90.0, 6);
    const double g1 = std::sin((x * 0.82 + y * 0.57) / 3.2 + 12.0 * n);
    const double g2 = std::sin((x * -0.35 + y * 0.94) / 7.5 + 8.0 * n);
    const double fine = noise.Fbm(x / 3.0, y / 3.0, 3);
    return {128 + 70 * g1 + 30 * (fine - 0.5),
            110 + 50 * g2 + 60 * (n - 0.5),
            100 + 40 * g1 * g2 + 80 * (fine - 0.5)};
  });
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/test_images";
  constexpr int kWidth = 960, kHeight = 540;
  std::filesystem::create_directories(dir);
  lensrect::WriteImage(dir + "/landscape.png", Landscape(kWidth, kHeight));
  lensrect::WriteImage(dir + "/geometric.png", Geometric(kWidth, kHeight));
  lensrect::WriteImage(dir + "/texture.png", Texture(kWidth, kHeight));
  std::printf("wrote 3 images to %s\n", dir.c_str());
  return 0;
}
