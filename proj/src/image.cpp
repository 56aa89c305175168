#include "ddsr/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

void require_same_shape(const Plane& a, const Plane& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": image dimensions differ (" + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
  }
}

void require_non_empty(const Plane& img, const char* op) {
  if (img.empty()) throw DimensionError(std::string(op) + ": empty image");
}

}  // namespace

Plane::Plane(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DimensionError("negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw DimensionError("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("pixel buffer length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
}

double Stencil::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

void DegradationSpec::validate() const {
  if (blur_kernel_size < 1 || blur_kernel_size % 2 == 0) {
    throw ConfigError("blur kernel size must be a positive odd integer");
  }
  if (!(blur_sigma > 0.0) || !std::isfinite(blur_sigma)) throw ConfigError("blur sigma must be positive");
  if (scale < 2) throw ConfigError("scale factor must be at least 2");
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel_1d(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw ConfigError("gaussian kernel size must be a positive odd integer");
  if (!(sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
  const int half = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size));
  for (int i = -half; i <= half; ++i) k[i + half] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  const double z = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= z;
  return k;
}

Stencil gaussian_kernel(const DegradationSpec& spec) {
  const auto k1 = gaussian_kernel_1d(spec.blur_kernel_size, spec.blur_sigma);
  const int n = spec.blur_kernel_size;
  Stencil s{n, n, std::vector<double>(static_cast<std::size_t>(n) * n)};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) s.taps[static_cast<std::size_t>(r) * n + c] = k1[r] * k1[c];
  return s;
}

Plane convolve(const Plane& img, const Stencil& kernel) {
  require_non_empty(img, "convolve");
  if (kernel.rows < 1 || kernel.cols < 1 || kernel.taps.size() != static_cast<std::size_t>(kernel.rows) * kernel.cols) {
    throw DimensionError("convolve: malformed kernel");
  }
  if (kernel.rows > img.height() || kernel.cols > img.width()) {
    throw DimensionError("convolve: " + std::to_string(kernel.cols) + "x" + std::to_string(kernel.rows) +
                         " kernel does not fit a " + std::to_string(img.width()) + "x" +
                         std::to_string(img.height()) + " image");
  }
  const int w = img.width();
  const int h = img.height();
  const int cr = kernel.rows / 2;
  const int cc = kernel.cols / 2;
  Plane out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kernel.rows; ++i) {
        const int sr = reflect_index(r - (i - cr), h);
        for (int j = 0; j < kernel.cols; ++j) {
          const double tap = kernel(i, j);
          if (tap == 0.0) continue;
          acc += tap * img(sr, reflect_index(c - (j - cc), w));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

GrayImage gaussian_blur(const GrayImage& img, const DegradationSpec& spec) {
  require_non_empty(img, "gaussian_blur");
  const int n = spec.blur_kernel_size;
  if (n > std::min(img.width(), img.height())) {
    throw DimensionError("gaussian_blur: kernel size " + std::to_string(n) + " exceeds image dimensions");
  }
  const auto k = gaussian_kernel_1d(n, spec.blur_sigma);
  const int half = n / 2;
  const int w = img.width();
  const int h = img.height();

  // Separable: horizontal then vertical pass.
  Plane tmp(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j) acc += k[j + half] * img(r, reflect_index(c - j, w));
      tmp(r, c) = acc;
    }
  }
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -half; i <= half; ++i) acc += k[i + half] * tmp(reflect_index(r - i, h), c);
      out(r, c) = acc;
    }
  }
  return out;
}

GrayImage decimate(const GrayImage& img, int scale) {
  require_non_empty(img, "decimate");
  if (scale < 1) throw ConfigError("decimate: scale must be positive");
  if (img.width() % scale != 0 || img.height() % scale != 0) {
    throw DimensionError("decimate: " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                         " is not divisible by scale " + std::to_string(scale));
  }
  GrayImage out(img.width() / scale, img.height() / scale);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) out(r, c) = img(r * scale, c * scale);
  return out;
}

GrayImage degrade(const GrayImage& img, const DegradationSpec& spec) {
  return decimate(gaussian_blur(img, spec), spec.scale);
}

double keys_cubic(double x) noexcept {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

GrayImage bicubic_upscale(const GrayImage& img, int scale) {
  require_non_empty(img, "bicubic_upscale");
  if (scale < 1) throw ConfigError("bicubic_upscale: scale must be positive");
  if (scale == 1) return img;

  // One 4-tap weight set per sub-pixel phase; taps cover source offsets -1..2.
  std::vector<std::array<double, 4>> phase(static_cast<std::size_t>(scale));
  for (int p = 0; p < scale; ++p) {
    const double frac = static_cast<double>(p) / scale;
    for (int m = -1; m <= 2; ++m) phase[p][m + 1] = keys_cubic(frac - m);
  }

  const int w = img.width();
  const int h = img.height();
  const int ow = w * scale;
  const int oh = h * scale;

  Plane tmp(ow, h);
  for (int r = 0; r < h; ++r) {
    for (int oc = 0; oc < ow; ++oc) {
      const int base = oc / scale;
      const auto& wt = phase[oc % scale];
      double acc = 0.0;
      for (int m = -1; m <= 2; ++m) acc += wt[m + 1] * img(r, reflect_index(base + m, w));
      tmp(r, oc) = acc;
    }
  }
  GrayImage out(ow, oh);
  for (int orow = 0; orow < oh; ++orow) {
    const int base = orow / scale;
    const auto& wt = phase[orow % scale];
    for (int oc = 0; oc < ow; ++oc) {
      double acc = 0.0;
      for (int m = -1; m <= 2; ++m) acc += wt[m + 1] * tmp(reflect_index(base + m, h), oc);
      out(orow, oc) = acc;
    }
  }
  return out;
}

SignedImage to_signed(const Plane& img) { return SignedImage(img); }

SignedImage img_add(const Plane& a, const SignedImage& b) {
  require_same_shape(a, b, "img_add");
  SignedImage out(a);
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

SignedImage img_sub(const Plane& a, const Plane& b) {
  require_same_shape(a, b, "img_sub");
  SignedImage out(a);
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return out;
}

GrayImage clamp_to_gray(const Plane& img) {
  GrayImage out(img);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

GrayImage crop_to_multiple(const GrayImage& img, int scale) {
  if (scale < 1) throw ConfigError("crop_to_multiple: scale must be positive");
  const int w = img.width() - img.width() % scale;
  const int h = img.height() - img.height() % scale;
  if (w == 0 || h == 0) throw DimensionError("crop_to_multiple: image smaller than the scale factor");
  if (w == img.width() && h == img.height()) return img;
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(r, c) = img(r, c);
  return out;
}

}  // namespace ddsr
