#pragma once

#include <limits>

#include "ddsr/image.hpp"

namespace ddsr {

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10*log10(1/MSE) for intensities in [0,1]; +inf for identical images.
double psnr(const Plane& a, const Plane& b);

double mean_squared_error(const Plane& a, const Plane& b);

}  // namespace ddsr
