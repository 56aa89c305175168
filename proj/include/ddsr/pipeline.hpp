#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddsr/dictionary_learning.hpp"
#include "ddsr/features.hpp"
#include "ddsr/image.hpp"

namespace ddsr {

/// Every hyperparameter of a two-layer model. Defaults: 5x5 Gaussian blur
/// with sigma 1, scale 2, 9x9 patches at every pixel (stride 1), 500 + 500
/// atoms, 3 atoms per patch. Stride 8 (one-pixel overlap) is accepted but
/// trains a much weaker model.
struct ModelConfig {
  DegradationSpec degradation;
  int patch_size = 9;
  int stride = 1;
  int sparsity = 3;
  int md_atoms = 500;
  int rd_atoms = 500;
  /// Iterations, seed and pruning threshold shared by both layers. Its
  /// n_atoms and sparsity are overridden per layer by layer_ksvd().
  KsvdConfig ksvd;
  double pca_energy = 0.999;

  void validate() const;
  KsvdConfig layer_ksvd(int n_atoms) const;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Trained dual-dictionary model: main dictionary (MD) for the first
/// high-frequency layer, residual dictionary (RD) for the second.
struct SRModel {
  ModelConfig config;
  FeaturePipeline md_features;
  CoupledDictionary md;
  FeaturePipeline rd_features;
  CoupledDictionary rd;
  std::uint32_t format_version = kModelFormatVersion;

  void validate() const;
};

/// Intermediate images of one synthesis run.
struct SynthesisLayers {
  GrayImage h_lf;     // bicubic upscale of the input
  SignedImage h_mhf;  // main high-frequency estimate
  SignedImage h_tmp;  // h_lf + h_mhf, unclamped
  SignedImage h_rhf;  // residual high-frequency estimate (empty if single layer)
  GrayImage h_est;    // clamped output
};

struct ImageTrainingStats {
  double psnr_lf = 0.0;   // bicubic reconstruction vs original
  double psnr_tmp = 0.0;  // after the main layer
};

struct TrainingReport {
  CoupledTrainingReport md;
  CoupledTrainingReport rd;
  std::vector<ImageTrainingStats> images;
};

/// Features -> OMP over the low dictionary -> high dictionary patches ->
/// least-squares patch assembly.
SignedImage synthesize_hf(const Plane& lf_img, const FeaturePipeline& features, const CoupledDictionary& dict,
                          int sparsity);

/// Learns MD from (H_LF features, H_ORG - H_LF patches), synthesizes the main
/// layer on the training images, then learns RD from (H_TMP features,
/// H_ORG - H_TMP patches). Patches of all images are pooled per layer.
SRModel train_model(const std::vector<GrayImage>& training_images, const ModelConfig& cfg,
                    TrainingReport* report = nullptr);

GrayImage super_resolve(const GrayImage& lr, const SRModel& model, SynthesisLayers* layers = nullptr);

/// Main layer only: clamp(H_LF + H_MHF).
GrayImage super_resolve_single_layer(const GrayImage& lr, const SRModel& model, SynthesisLayers* layers = nullptr);

}  // namespace ddsr
