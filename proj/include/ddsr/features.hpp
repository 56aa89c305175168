#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ddsr/image.hpp"
#include "ddsr/patching.hpp"

namespace ddsr {

/// High-pass kernels applied before patch extraction.
struct FilterBank {
  std::vector<Stencil> kernels;

  /// First and second order derivatives in both directions:
  /// [1,0,-1], its transpose, [1,0,-2,0,1]/2 and its transpose.
  static FilterBank gradient_laplacian();

  /// Throws ConfigError unless every kernel is non-empty and zero-DC.
  void validate() const;
};

struct PcaProjection {
  Eigen::VectorXd mean;   // raw_dim
  Eigen::MatrixXd basis;  // reduced_dim x raw_dim, orthonormal rows
  double energy_kept = 0.999;

  Eigen::Index raw_dim() const { return basis.cols(); }
  Eigen::Index reduced_dim() const { return basis.rows(); }
};

/// Everything needed to turn a low-frequency HR image into one feature
/// column per patch origin.
struct FeaturePipeline {
  FilterBank bank;
  PcaProjection pca;
  int patch_size = 9;
  int stride = 1;
};

std::vector<SignedImage> filter_image(const Plane& img, const FilterBank& bank);

/// Filtered copies of one image plus its patch grid; yields raw feature
/// columns on demand so large grids never have to be held in full.
class RawFeatureSampler {
 public:
  RawFeatureSampler(const Plane& img, const FilterBank& bank, int patch_size, int stride);

  Eigen::Index size() const { return static_cast<Eigen::Index>(origins_.size()); }
  Eigen::Index dim() const;
  const std::vector<PatchOrigin>& origins() const { return origins_; }

  /// Raw feature column of patch `k`.
  void column(Eigen::Index k, Eigen::Ref<Eigen::VectorXd> out) const;
  /// Columns for the given patch indices, in order.
  Eigen::MatrixXd columns(std::span<const Eigen::Index> patches) const;

 private:
  std::vector<SignedImage> filtered_;
  std::vector<PatchOrigin> origins_;
  int patch_size_;
};

/// Per-origin concatenation of the patches of every filtered image, in
/// kernel order. Column k matches origin k of extract_patches on `img`.
Eigen::MatrixXd raw_features(const Plane& img, const FilterBank& bank, int patch_size, int stride);
Eigen::MatrixXd raw_features(const Plane& img, const FeaturePipeline& pipeline);

enum class PcaCentering {
  sample_mean,  // classic covariance PCA
  none,         // second-moment PCA, mean pinned to zero
};

/// First and second raw moments of a stream of sample columns.
struct SampleMoments {
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;  // sum of x x^T
  Eigen::Index count = 0;

  explicit SampleMoments(Eigen::Index dim = 0)
      : sum(Eigen::VectorXd::Zero(dim)), outer(Eigen::MatrixXd::Zero(dim, dim)) {}
  void add(const Eigen::MatrixXd& columns);
};

/// PCA over sample columns. Keeps the smallest number of leading
/// components whose eigenvalues reach `energy_kept` of the total (never
/// fewer than one). Each basis row is signed so that its largest-magnitude
/// entry is positive.
/// With PcaCentering::none the mean stays zero, so an all-zero feature
/// column projects to exactly zero.
PcaProjection fit_pca(const Eigen::MatrixXd& samples, double energy_kept,
                      PcaCentering centering = PcaCentering::sample_mean);
PcaProjection fit_pca(const SampleMoments& moments, double energy_kept,
                      PcaCentering centering = PcaCentering::sample_mean);

Eigen::MatrixXd project(const Eigen::MatrixXd& features, const PcaProjection& pca);

/// raw_features followed by project, computed in column chunks.
Eigen::MatrixXd extract_features(const Plane& img, const FeaturePipeline& pipeline);

}  // namespace ddsr
