#pragma once

#include <filesystem>
#include <iosfwd>

#include "ddsr/pipeline.hpp"

namespace ddsr {

/// Flat `key = value` text, '#' starts a comment. Keys:
///   blur_kernel_size blur_sigma scale patch_size stride sparsity
///   md_atoms rd_atoms ksvd_iterations seed min_patch_norm pca_energy
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig parse_config(std::istream& in);
ModelConfig load_config(const std::filesystem::path& path);
void write_config(const ModelConfig& cfg, std::ostream& out);

}  // namespace ddsr
