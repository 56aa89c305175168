#include "ddsr/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ddsr/errors.hpp"
#include "ddsr/patching.hpp"

namespace ddsr {

FilterBank FilterBank::gradient_laplacian() {
  FilterBank bank;
  bank.kernels.push_back({1, 3, {1.0, 0.0, -1.0}});
  bank.kernels.push_back({3, 1, {1.0, 0.0, -1.0}});
  bank.kernels.push_back({1, 5, {0.5, 0.0, -1.0, 0.0, 0.5}});
  bank.kernels.push_back({5, 1, {0.5, 0.0, -1.0, 0.0, 0.5}});
  return bank;
}

void FilterBank::validate() const {
  if (kernels.empty()) throw ConfigError("filter bank is empty");
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const auto& k = kernels[i];
    if (k.rows < 1 || k.cols < 1 || k.taps.size() != static_cast<std::size_t>(k.rows) * k.cols) {
      throw ConfigError("filter bank kernel " + std::to_string(i) + " is malformed");
    }
    if (std::abs(k.sum()) > 1e-12) {
      throw ConfigError("filter bank kernel " + std::to_string(i) + " is not high-pass (non-zero DC)");
    }
  }
}

std::vector<SignedImage> filter_image(const Plane& img, const FilterBank& bank) {
  std::vector<SignedImage> out;
  out.reserve(bank.kernels.size());
  for (const auto& k : bank.kernels) out.emplace_back(convolve(img, k));
  return out;
}

RawFeatureSampler::RawFeatureSampler(const Plane& img, const FilterBank& bank, int patch_size, int stride)
    : filtered_(filter_image(img, bank)),
      origins_(patch_origins(img.height(), img.width(), patch_size, stride)),
      patch_size_(patch_size) {}

Eigen::Index RawFeatureSampler::dim() const {
  return static_cast<Eigen::Index>(filtered_.size()) * patch_size_ * patch_size_;
}

void RawFeatureSampler::column(Eigen::Index k, Eigen::Ref<Eigen::VectorXd> out) const {
  const PatchOrigin o = origins_[static_cast<std::size_t>(k)];
  Eigen::Index i = 0;
  for (const auto& f : filtered_)
    for (int r = 0; r < patch_size_; ++r)
      for (int c = 0; c < patch_size_; ++c) out[i++] = f(o.row + r, o.col + c);
}

Eigen::MatrixXd RawFeatureSampler::columns(std::span<const Eigen::Index> patches) const {
  Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(patches.size()));
  for (std::size_t j = 0; j < patches.size(); ++j) column(patches[j], out.col(static_cast<Eigen::Index>(j)));
  return out;
}

Eigen::MatrixXd raw_features(const Plane& img, const FilterBank& bank, int patch_size, int stride) {
  const RawFeatureSampler sampler(img, bank, patch_size, stride);
  Eigen::MatrixXd out(sampler.dim(), sampler.size());
  for (Eigen::Index k = 0; k < sampler.size(); ++k) sampler.column(k, out.col(k));
  return out;
}

Eigen::MatrixXd raw_features(const Plane& img, const FeaturePipeline& pipeline) {
  return raw_features(img, pipeline.bank, pipeline.patch_size, pipeline.stride);
}

void SampleMoments::add(const Eigen::MatrixXd& columns) {
  if (columns.rows() != sum.size()) {
    throw DimensionError("SampleMoments: sample dimension " + std::to_string(columns.rows()) + " differs from " +
                         std::to_string(sum.size()));
  }
  sum += columns.rowwise().sum();
  outer.selfadjointView<Eigen::Lower>().rankUpdate(columns);
  count += columns.cols();
}

PcaProjection fit_pca(const Eigen::MatrixXd& samples, double energy_kept, PcaCentering centering) {
  // Center explicitly so the covariance avoids the cancellation in E[xx^T] - mm^T.
  const Eigen::VectorXd mean = centering == PcaCentering::sample_mean ? Eigen::VectorXd(samples.rowwise().mean())
                                                                      : Eigen::VectorXd::Zero(samples.rows());
  SampleMoments m(samples.rows());
  m.add(samples.colwise() - mean);
  PcaProjection pca = fit_pca(m, energy_kept, PcaCentering::none);
  pca.mean = mean;
  return pca;
}

PcaProjection fit_pca(const SampleMoments& moments, double energy_kept, PcaCentering centering) {
  if (moments.count < 2) throw ConfigError("fit_pca needs at least two samples");
  if (!(energy_kept > 0.0 && energy_kept <= 1.0)) throw ConfigError("PCA energy must lie in (0, 1]");

  const Eigen::Index dim = moments.sum.size();
  const double n_samples = static_cast<double>(moments.count);
  PcaProjection pca;
  pca.energy_kept = energy_kept;
  pca.mean = centering == PcaCentering::sample_mean ? Eigen::VectorXd(moments.sum / n_samples)
                                                    : Eigen::VectorXd::Zero(dim);
  // Only the lower triangle of `outer` is maintained.
  Eigen::MatrixXd cov = moments.outer.selfadjointView<Eigen::Lower>();
  cov -= n_samples * pca.mean * pca.mean.transpose();
  cov /= n_samples - 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition failed");
  // Ascending from Eigen; walk it backwards.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const Eigen::Index n = values.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += std::max(values[i], 0.0);

  Eigen::Index keep = 1;
  if (total > 0.0) {
    const double target = energy_kept * total - 1e-12 * total;
    double cumulative = 0.0;
    keep = n;
    for (Eigen::Index i = 0; i < n; ++i) {
      cumulative += std::max(values[n - 1 - i], 0.0);
      if (cumulative >= target) {
        keep = i + 1;
        break;
      }
    }
  }

  pca.basis.resize(keep, dim);
  for (Eigen::Index i = 0; i < keep; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    pca.basis.row(i) = v.transpose();
  }
  return pca;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& features, const PcaProjection& pca) {
  if (features.rows() != pca.raw_dim() || pca.mean.size() != pca.raw_dim()) {
    throw DimensionError("project: feature dimension " + std::to_string(features.rows()) +
                         " does not match PCA input dimension " + std::to_string(pca.raw_dim()));
  }
  return pca.basis * (features.colwise() - pca.mean);
}

Eigen::MatrixXd extract_features(const Plane& img, const FeaturePipeline& pipeline) {
  const RawFeatureSampler sampler(img, pipeline.bank, pipeline.patch_size, pipeline.stride);
  const auto& pca = pipeline.pca;
  if (sampler.dim() != pca.raw_dim() || pca.mean.size() != pca.raw_dim()) {
    throw DimensionError("extract_features: raw feature dimension " + std::to_string(sampler.dim()) +
                         " does not match PCA input dimension " + std::to_string(pca.raw_dim()));
  }
  constexpr Eigen::Index kChunk = 2048;
  Eigen::MatrixXd out(pca.reduced_dim(), sampler.size());
  Eigen::MatrixXd raw(sampler.dim(), kChunk);
  for (Eigen::Index k0 = 0; k0 < sampler.size(); k0 += kChunk) {
    const Eigen::Index n = std::min(kChunk, sampler.size() - k0);
    for (Eigen::Index j = 0; j < n; ++j) sampler.column(k0 + j, raw.col(j));
    out.middleCols(k0, n).noalias() = pca.basis * (raw.leftCols(n).colwise() - pca.mean);
  }
  return out;
}

}  // namespace ddsr
