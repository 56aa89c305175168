#pragma once

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance runner. Oracles here are deliberately naive: dense loops that
// follow the textbook definitions, independent of the library internals.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ddsr/image.hpp"
#include "ddsr/patching.hpp"
#include "ddsr/pipeline.hpp"
#include "ddsr/sparse_coding.hpp"

namespace ddsr::testing {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Dictionary unit_dictionary(Eigen::Index dim, Eigen::Index atoms, std::mt19937_64& rng) {
  Dictionary d{gaussian_matrix(dim, atoms, rng)};
  d.atoms.colwise().normalize();
  return d;
}

inline Plane random_plane(int width, int height, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Plane p(width, height);
  for (double& v : p.data()) v = u(rng);
  return p;
}

/// Smooth sinusoidal texture plus mild noise, in [0,1]; something with real
/// high-frequency content for small training runs.
inline GrayImage textured_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fx = 0.15 + 0.3 * u(rng), fy = 0.1 + 0.3 * u(rng), ph = 6.0 * u(rng);
  GrayImage img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double v = 0.5 + 0.2 * std::sin(fx * c + ph) * std::cos(fy * r) + 0.15 * std::sin(0.05 * (r + 2 * c));
      v += ((r / 6 + c / 6) % 2 ? 0.08 : -0.08) + 0.03 * (u(rng) - 0.5);
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

/// Assembly written straight from the normal equations: accumulate R_k^T p_k
/// and R_k^T R_k 1 into dense images, then divide.
inline Plane brute_force_assemble(const PatchGrid& grid) {
  Plane num(grid.image_width, grid.image_height);
  Plane den(grid.image_width, grid.image_height);
  const int ps = grid.patch_size;
  for (std::size_t k = 0; k < grid.origins.size(); ++k) {
    for (int i = 0; i < ps; ++i) {
      for (int j = 0; j < ps; ++j) {
        const int r = grid.origins[k].row + i, c = grid.origins[k].col + j;
        num(r, c) += grid.patches(i * ps + j, static_cast<Eigen::Index>(k));
        den(r, c) += 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < num.size(); ++i) num.data()[i] /= den.data()[i];
  return num;
}

/// Random PatchGrid over a random image size and geometry.
inline PatchGrid random_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ps_dist(1, 9);
  const int ps = ps_dist(rng);
  const int stride = std::uniform_int_distribution<int>(1, ps)(rng);
  const int h = std::uniform_int_distribution<int>(ps, ps + 25)(rng);
  const int w = std::uniform_int_distribution<int>(ps, ps + 25)(rng);
  PatchGrid g;
  g.patch_size = ps;
  g.stride = stride;
  g.image_height = h;
  g.image_width = w;
  g.origins = patch_origins(h, w, ps, stride);
  g.patches = gaussian_matrix(static_cast<Eigen::Index>(ps) * ps, static_cast<Eigen::Index>(g.origins.size()), rng);
  return g;
}

/// Small but complete model configuration for fast training in tests.
inline ModelConfig small_config() {
  ModelConfig cfg;
  cfg.patch_size = 5;
  cfg.stride = 2;
  cfg.sparsity = 2;
  cfg.md_atoms = 12;
  cfg.rd_atoms = 12;
  cfg.ksvd.iterations = 4;
  cfg.ksvd.min_patch_norm = 0.01;
  return cfg;
}

/// Random 3-sparse codes over K atoms. Sample j always uses atom j % K, so
/// with n >= K every atom appears and the code matrix has full row rank.
inline std::vector<SparseCode> planted_codes(int K, int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, K - 1);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::vector<SparseCode> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto& c = out[static_cast<std::size_t>(j)];
    c.indices.push_back(j % K);
    while (c.indices.size() < 3) {
      const int a = pick(rng);
      if (std::find(c.indices.begin(), c.indices.end(), a) == c.indices.end()) c.indices.push_back(a);
    }
    for (std::size_t i = 0; i < 3; ++i) c.coefficients.push_back(coef(rng) + (coef(rng) > 0 ? 0.5 : -0.5));
  }
  return out;
}

/// Model trained once per test binary on two synthetic textures.
inline const SRModel& small_model(TrainingReport* report = nullptr) {
  static TrainingReport cached_report;
  static const SRModel model =
      train_model({textured_image(64, 64, 100), textured_image(48, 56, 101)}, small_config(), &cached_report);
  if (report) *report = cached_report;
  return model;
}

inline bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
  });
}

inline bool bit_equal(const Plane& a, const Plane& b) {
  if (!a.same_shape(b)) return false;
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::bit_cast<std::uint64_t>(x[i]) != std::bit_cast<std::uint64_t>(y[i])) return false;
  return true;
}

inline bool same_features(const FeaturePipeline& a, const FeaturePipeline& b) {
  if (a.patch_size != b.patch_size || a.stride != b.stride || a.bank.kernels.size() != b.bank.kernels.size()) return false;
  for (std::size_t i = 0; i < a.bank.kernels.size(); ++i) {
    const auto& x = a.bank.kernels[i];
    const auto& y = b.bank.kernels[i];
    if (x.rows != y.rows || x.cols != y.cols || x.taps != y.taps) return false;
  }
  return bit_equal(a.pca.mean, b.pca.mean) && bit_equal(a.pca.basis, b.pca.basis) &&
         a.pca.energy_kept == b.pca.energy_kept;
}

/// Field-by-field bit comparison of two models.
inline bool same_model(const SRModel& a, const SRModel& b) {
  const auto& ca = a.config;
  const auto& cb = b.config;
  const bool cfg = ca.degradation.blur_kernel_size == cb.degradation.blur_kernel_size &&
                   std::bit_cast<std::uint64_t>(ca.degradation.blur_sigma) ==
                       std::bit_cast<std::uint64_t>(cb.degradation.blur_sigma) &&
                   ca.degradation.scale == cb.degradation.scale && ca.patch_size == cb.patch_size &&
                   ca.stride == cb.stride && ca.sparsity == cb.sparsity && ca.md_atoms == cb.md_atoms &&
                   ca.rd_atoms == cb.rd_atoms && ca.ksvd.iterations == cb.ksvd.iterations &&
                   ca.ksvd.seed == cb.ksvd.seed &&
                   std::bit_cast<std::uint64_t>(ca.ksvd.min_patch_norm) ==
                       std::bit_cast<std::uint64_t>(cb.ksvd.min_patch_norm) &&
                   std::bit_cast<std::uint64_t>(ca.pca_energy) == std::bit_cast<std::uint64_t>(cb.pca_energy);
  return cfg && a.format_version == b.format_version && same_features(a.md_features, b.md_features) &&
         same_features(a.rd_features, b.rd_features) && bit_equal(a.md.low.atoms, b.md.low.atoms) &&
         bit_equal(a.md.high, b.md.high) && bit_equal(a.rd.low.atoms, b.rd.low.atoms) &&
         bit_equal(a.rd.high, b.rd.high);
}

}  // namespace ddsr::testing
