#include "ddsr/pipeline.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <tuple>
#include <utility>

#include "ddsr/errors.hpp"
#include "ddsr/metrics.hpp"
#include "ddsr/patching.hpp"

namespace ddsr {

namespace {

void check_pipeline(const FeaturePipeline& f, const CoupledDictionary& d, int patch_size, const char* layer) {
  const std::string name(layer);
  if (f.pca.reduced_dim() != d.low.signal_dim()) {
    throw DimensionError(name + ": low dictionary dimension " + std::to_string(d.low.signal_dim()) +
                         " does not match feature dimension " + std::to_string(f.pca.reduced_dim()));
  }
  if (d.high.rows() != static_cast<Eigen::Index>(patch_size) * patch_size) {
    throw DimensionError(name + ": high dictionary atoms are not patch-sized");
  }
  if (f.patch_size != patch_size) throw DimensionError(name + ": feature patch size differs from model");
  if (f.pca.raw_dim() != static_cast<Eigen::Index>(f.bank.kernels.size()) * patch_size * patch_size) {
    throw DimensionError(name + ": PCA input dimension does not match the filter bank");
  }
  d.validate();
}

// One training image of a layer: its raw feature source and the matching
// high-frequency target patches.
struct LayerSource {
  RawFeatureSampler features;
  Eigen::MatrixXd high;
  std::vector<Eigen::Index> kept;
};

LayerSource make_source(const Plane& lf_input, const SignedImage& hf_target, const ModelConfig& cfg) {
  LayerSource src{RawFeatureSampler(lf_input, FilterBank::gradient_laplacian(), cfg.patch_size, cfg.stride),
                  extract_patches(hf_target, cfg.patch_size, cfg.stride).patches,
                  {}};
  for (Eigen::Index k = 0; k < src.high.cols(); ++k) {
    if (src.high.col(k).norm() >= cfg.ksvd.min_patch_norm) src.kept.push_back(k);
  }
  return src;
}

// Raw feature columns of the kept patches, handed to `sink` in bounded chunks.
template <typename Sink>
void for_each_kept_chunk(const std::vector<LayerSource>& sources, Sink&& sink) {
  constexpr std::size_t kChunk = 2048;
  for (const auto& src : sources) {
    for (std::size_t k0 = 0; k0 < src.kept.size(); k0 += kChunk) {
      const std::size_t n = std::min(kChunk, src.kept.size() - k0);
      sink(src.features.columns(std::span(src.kept).subspan(k0, n)));
    }
  }
}

// PCA fitted on the pairs that survive pruning, then coupled training.
// Raw features are streamed so only the projected features are pooled.
std::pair<FeaturePipeline, CoupledDictionary> train_layer(const std::vector<LayerSource>& sources,
                                                          const ModelConfig& cfg, int n_atoms, const char* layer,
                                                          CoupledTrainingReport* report) {
  const KsvdConfig kcfg = cfg.layer_ksvd(n_atoms);
  Eigen::Index total = 0;
  Eigen::Index kept = 0;
  for (const auto& src : sources) {
    total += src.high.cols();
    kept += static_cast<Eigen::Index>(src.kept.size());
  }
  if (kept < n_atoms) {
    throw ConfigError(std::string("insufficient training patches for ") + layer + ": " + std::to_string(kept) +
                      " of " + std::to_string(total) + " patches have high-frequency norm >= " +
                      std::to_string(kcfg.min_patch_norm) + ", " + std::to_string(n_atoms) + " needed");
  }
  FeaturePipeline features;
  features.bank = FilterBank::gradient_laplacian();
  features.patch_size = cfg.patch_size;
  features.stride = cfg.stride;

  SampleMoments moments(sources.front().features.dim());
  for_each_kept_chunk(sources, [&](const Eigen::MatrixXd& raw) { moments.add(raw); });
  features.pca = fit_pca(moments, cfg.pca_energy, PcaCentering::none);

  Eigen::MatrixXd low(features.pca.reduced_dim(), kept);
  Eigen::MatrixXd high(sources.front().high.rows(), kept);
  Eigen::Index at = 0;
  for_each_kept_chunk(sources, [&](const Eigen::MatrixXd& raw) {
    low.middleCols(at, raw.cols()) = project(raw, features.pca);
    at += raw.cols();
  });
  at = 0;
  for (const auto& src : sources)
    for (Eigen::Index k : src.kept) high.col(at++) = src.high.col(k);

  CoupledDictionary dict = train_coupled(low, high, kcfg, report);
  return {std::move(features), std::move(dict)};
}

SignedImage run_layers(const GrayImage& lr, const SRModel& model, bool second_layer, SynthesisLayers* layers) {
  const int scale = model.config.degradation.scale;
  GrayImage h_lf = bicubic_upscale(lr, scale);
  if (h_lf.width() < model.config.patch_size || h_lf.height() < model.config.patch_size) {
    throw DimensionError("input too small: upscaled image is smaller than one patch");
  }
  const int L = model.config.sparsity;
  SignedImage h_mhf = synthesize_hf(h_lf, model.md_features, model.md, L);
  SignedImage h_tmp = img_add(h_lf, h_mhf);
  SignedImage h_rhf;
  SignedImage h_sum = h_tmp;
  if (second_layer) {
    h_rhf = synthesize_hf(h_tmp, model.rd_features, model.rd, L);
    h_sum = img_add(h_tmp, h_rhf);
  }
  if (layers) {
    layers->h_lf = std::move(h_lf);
    layers->h_mhf = std::move(h_mhf);
    layers->h_tmp = h_tmp;
    layers->h_rhf = std::move(h_rhf);
  }
  return h_sum;
}

}  // namespace

void ModelConfig::validate() const {
  degradation.validate();
  if (patch_size < 1) throw ConfigError("patch_size must be positive");
  if (stride < 1 || stride > patch_size) throw ConfigError("stride must lie in [1, patch_size]");
  if (sparsity < 1) throw ConfigError("sparsity must be positive");
  if (md_atoms < sparsity || rd_atoms < sparsity) throw ConfigError("dictionary sizes must be >= sparsity");
  if (!(pca_energy > 0.0 && pca_energy <= 1.0)) throw ConfigError("pca_energy must lie in (0, 1]");
  layer_ksvd(md_atoms).validate();
  layer_ksvd(rd_atoms).validate();
}

KsvdConfig ModelConfig::layer_ksvd(int n_atoms) const {
  KsvdConfig out = ksvd;
  out.n_atoms = n_atoms;
  out.sparsity = sparsity;
  return out;
}

void SRModel::validate() const {
  config.validate();
  check_pipeline(md_features, md, config.patch_size, "main dictionary");
  check_pipeline(rd_features, rd, config.patch_size, "residual dictionary");
  if (md.n_atoms() < config.sparsity || rd.n_atoms() < config.sparsity) {
    throw DimensionError("dictionary smaller than the sparsity level");
  }
}

SignedImage synthesize_hf(const Plane& lf_img, const FeaturePipeline& features, const CoupledDictionary& dict,
                          int sparsity) {
  const Eigen::MatrixXd feats = extract_features(lf_img, features);
  const auto codes = omp_batch(dict.low, feats, sparsity);

  PatchGrid grid;
  grid.patch_size = features.patch_size;
  grid.stride = features.stride;
  grid.image_height = lf_img.height();
  grid.image_width = lf_img.width();
  grid.origins = patch_origins(lf_img.height(), lf_img.width(), features.patch_size, features.stride);
  if (static_cast<std::size_t>(feats.cols()) != grid.origins.size()) {
    throw DimensionError("synthesize_hf: feature columns do not match patch origins");
  }
  grid.patches.resize(dict.high.rows(), feats.cols());
  for (Eigen::Index k = 0; k < feats.cols(); ++k) {
    grid.patches.col(k) = reconstruct(dict.high, codes[static_cast<std::size_t>(k)]);
  }
  return assemble_patches(grid);
}

SRModel train_model(const std::vector<GrayImage>& training_images, const ModelConfig& cfg,
                    TrainingReport* report) {
  cfg.validate();
  if (training_images.empty()) throw ConfigError("no training images");

  struct Stage {
    GrayImage h_org;
    GrayImage h_lf;
  };
  std::vector<Stage> stages;
  std::vector<LayerSource> sources;
  for (const auto& img : training_images) {
    Stage s;
    s.h_org = crop_to_multiple(img, cfg.degradation.scale);
    s.h_lf = bicubic_upscale(degrade(s.h_org, cfg.degradation), cfg.degradation.scale);
    const SignedImage h_hf = img_sub(s.h_org, s.h_lf);
    sources.push_back(make_source(s.h_lf, h_hf, cfg));
    stages.push_back(std::move(s));
  }

  SRModel model;
  model.config = cfg;
  std::tie(model.md_features, model.md) =
      train_layer(sources, cfg, cfg.md_atoms, "main dictionary", report ? &report->md : nullptr);

  sources.clear();
  for (const auto& s : stages) {
    const SignedImage h_mhf = synthesize_hf(s.h_lf, model.md_features, model.md, cfg.sparsity);
    const SignedImage h_tmp = img_add(s.h_lf, h_mhf);
    const SignedImage h_rhf = img_sub(s.h_org, h_tmp);
    sources.push_back(make_source(h_tmp, h_rhf, cfg));
    if (report) {
      report->images.push_back({psnr(clamp_to_gray(s.h_lf), s.h_org), psnr(clamp_to_gray(h_tmp), s.h_org)});
    }
  }
  std::tie(model.rd_features, model.rd) =
      train_layer(sources, cfg, cfg.rd_atoms, "residual dictionary", report ? &report->rd : nullptr);

  model.validate();
  return model;
}

GrayImage super_resolve(const GrayImage& lr, const SRModel& model, SynthesisLayers* layers) {
  GrayImage out = clamp_to_gray(run_layers(lr, model, true, layers));
  if (layers) layers->h_est = out;
  return out;
}

GrayImage super_resolve_single_layer(const GrayImage& lr, const SRModel& model, SynthesisLayers* layers) {
  GrayImage out = clamp_to_gray(run_layers(lr, model, false, layers));
  if (layers) layers->h_est = out;
  return out;
}

}  // namespace ddsr
