#include "ddsr/patching.hpp"

#include <algorithm>
#include <string>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

void check_geometry(int height, int width, int patch_size, int stride) {
  if (patch_size < 1) throw ConfigError("patch size must be positive");
  if (stride < 1 || stride > patch_size) throw ConfigError("stride must lie in [1, patch_size]");
  if (patch_size > std::min(height, width)) {
    throw DimensionError("patch size " + std::to_string(patch_size) + " exceeds image dimensions " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

std::vector<int> axis_offsets(int length, int patch_size, int stride) {
  std::vector<int> out;
  const int last = length - patch_size;
  for (int o = 0; o < last; o += stride) out.push_back(o);
  out.push_back(last);
  return out;
}

std::vector<PatchOrigin> patch_origins(int height, int width, int patch_size, int stride) {
  check_geometry(height, width, patch_size, stride);
  const auto rows = axis_offsets(height, patch_size, stride);
  const auto cols = axis_offsets(width, patch_size, stride);
  std::vector<PatchOrigin> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) out.push_back({r, c});
  return out;
}

void PatchGrid::validate() const {
  if (patch_size < 1 || stride < 1 || stride > patch_size) throw DimensionError("patch grid: bad geometry");
  if (patches.rows() != static_cast<Eigen::Index>(patch_size) * patch_size) {
    throw DimensionError("patch grid: patch length does not match patch size");
  }
  if (patches.cols() != static_cast<Eigen::Index>(origins.size())) {
    throw DimensionError("patch grid: " + std::to_string(patches.cols()) + " patches for " +
                         std::to_string(origins.size()) + " origins");
  }
  for (const auto& o : origins) {
    if (o.row < 0 || o.col < 0 || o.row > image_height - patch_size || o.col > image_width - patch_size) {
      throw DimensionError("patch grid: origin (" + std::to_string(o.row) + "," + std::to_string(o.col) +
                           ") outside the image");
    }
  }
}

PatchGrid extract_patches(const Plane& img, int patch_size, int stride) {
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.stride = stride;
  grid.image_height = img.height();
  grid.image_width = img.width();
  grid.origins = patch_origins(img.height(), img.width(), patch_size, stride);
  grid.patches.resize(static_cast<Eigen::Index>(patch_size) * patch_size,
                      static_cast<Eigen::Index>(grid.origins.size()));
  for (std::size_t k = 0; k < grid.origins.size(); ++k) {
    const auto [r0, c0] = grid.origins[k];
    auto col = grid.patches.col(static_cast<Eigen::Index>(k));
    Eigen::Index i = 0;
    for (int r = 0; r < patch_size; ++r)
      for (int c = 0; c < patch_size; ++c) col[i++] = img(r0 + r, c0 + c);
  }
  return grid;
}

SignedImage assemble_patches(const PatchGrid& grid) {
  grid.validate();
  const int ps = grid.patch_size;
  // Mean accumulated as first contribution plus averaged deviations from it,
  // so pixels whose covering patches agree come back bit-exact.
  SignedImage first(grid.image_width, grid.image_height);
  SignedImage deviation(grid.image_width, grid.image_height);
  std::vector<int> coverage(first.size(), 0);
  for (std::size_t k = 0; k < grid.origins.size(); ++k) {
    const auto [r0, c0] = grid.origins[k];
    const auto col = grid.patches.col(static_cast<Eigen::Index>(k));
    Eigen::Index i = 0;
    for (int r = 0; r < ps; ++r) {
      for (int c = 0; c < ps; ++c) {
        const double v = col[i++];
        int& n = coverage[static_cast<std::size_t>(r0 + r) * grid.image_width + c0 + c];
        if (n++ == 0) {
          first(r0 + r, c0 + c) = v;
        } else {
          deviation(r0 + r, c0 + c) += v - first(r0 + r, c0 + c);
        }
      }
    }
  }
  auto px = first.data();
  const auto dev = deviation.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (coverage[i] == 0) {
      throw CoverageError("pixel (" + std::to_string(i / grid.image_width) + "," +
                          std::to_string(i % grid.image_width) + ") is not covered by any patch");
    }
    px[i] += dev[i] / coverage[i];
  }
  return first;
}

}  // namespace ddsr
