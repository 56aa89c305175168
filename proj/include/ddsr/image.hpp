#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ddsr {

/// Row-major grid of real samples. Base storage shared by the two image
/// flavours below; it carries no range semantics of its own.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);
  Plane(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& operator()(int row, int col) noexcept {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(const Plane& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const Plane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Intensity image, nominally in [0,1]. Interpolation may overshoot the
/// range; values are only clipped by clamp_to_gray at output boundaries.
class GrayImage : public Plane {
 public:
  using Plane::Plane;
  explicit GrayImage(Plane p) : Plane(std::move(p)) {}
  bool operator==(const GrayImage&) const = default;
};

/// High-frequency component; any sign, never clamped.
class SignedImage : public Plane {
 public:
  using Plane::Plane;
  explicit SignedImage(Plane p) : Plane(std::move(p)) {}
  bool operator==(const SignedImage&) const = default;
};

/// Dense 2-D convolution kernel, anchored at its center.
struct Stencil {
  int rows = 0;
  int cols = 0;
  std::vector<double> taps;  // row-major, rows*cols

  double operator()(int r, int c) const { return taps[static_cast<std::size_t>(r) * cols + c]; }
  double sum() const;
};

/// Blur (H), decimation (D) and scale factor of the observation model.
struct DegradationSpec {
  int blur_kernel_size = 5;
  double blur_sigma = 1.0;
  int scale = 2;

  void validate() const;
};

/// Mirror-without-repeat index reflection (…2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n) noexcept;

std::vector<double> gaussian_kernel_1d(int size, double sigma);
Stencil gaussian_kernel(const DegradationSpec& spec);

/// True 2-D convolution (kernel flipped) with symmetric border extension.
/// Output has the input's dimensions.
Plane convolve(const Plane& img, const Stencil& kernel);

GrayImage gaussian_blur(const GrayImage& img, const DegradationSpec& spec);
GrayImage decimate(const GrayImage& img, int scale);
GrayImage degrade(const GrayImage& img, const DegradationSpec& spec);

/// Keys cubic convolution kernel, a = -0.5.
double keys_cubic(double x) noexcept;

/// Separable bicubic magnification. Output sample (r*scale, c*scale) sits
/// exactly on source sample (r, c); intermediate samples interpolate
/// towards (r+1, c+1). This matches the top-left decimation phase.
GrayImage bicubic_upscale(const GrayImage& img, int scale);

SignedImage to_signed(const Plane& img);
SignedImage img_add(const Plane& a, const SignedImage& b);
SignedImage img_sub(const Plane& a, const Plane& b);
GrayImage clamp_to_gray(const Plane& img);

/// Largest top-left anchored crop whose dimensions divide by `scale`.
GrayImage crop_to_multiple(const GrayImage& img, int scale);

}  // namespace ddsr
