#include "ddsr/metrics.hpp"

#include <cmath>

#include "ddsr/errors.hpp"

namespace ddsr {

double mean_squared_error(const Plane& a, const Plane& b) {
  if (!a.same_shape(b) || a.empty()) throw DimensionError("psnr: images must be non-empty and equally sized");
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double psnr(const Plane& a, const Plane& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return kPsnrIdentical;
  return -10.0 * std::log10(mse);
}

}  // namespace ddsr
