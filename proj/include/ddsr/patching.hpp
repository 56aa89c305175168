#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ddsr/image.hpp"

namespace ddsr {

struct PatchOrigin {
  int row = 0;
  int col = 0;
  bool operator==(const PatchOrigin&) const = default;
};

/// Overlapping square patches of one image, one column per patch. Patch
/// pixels are stored row-major inside each column.
struct PatchGrid {
  int patch_size = 9;
  int stride = 1;
  int image_height = 0;
  int image_width = 0;
  std::vector<PatchOrigin> origins;
  Eigen::MatrixXd patches;

  /// Throws DimensionError if origins, patch matrix and image dims disagree.
  void validate() const;
};

/// Start offsets along one axis: 0, stride, 2*stride, ... and a final
/// offset clamped to length - patch_size so the border is always covered.
std::vector<int> axis_offsets(int length, int patch_size, int stride);

/// Row-major enumeration of the grid origins for an image.
std::vector<PatchOrigin> patch_origins(int height, int width, int patch_size, int stride);

PatchGrid extract_patches(const Plane& img, int patch_size, int stride);

/// Least-squares reassembly: every pixel becomes the mean of the patch
/// values covering it.
SignedImage assemble_patches(const PatchGrid& grid);

}  // namespace ddsr
