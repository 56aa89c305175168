#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ddsr/pipeline.hpp"

namespace ddsr {

/// `.ddsr` layout, all integers and reals little-endian 64-bit:
///
///   "DDSRMODL"  u32 format_version
///   config               scalar hyperparameters + sampling conventions
///   main features        filter bank, patch geometry, PCA
///   main dictionary      low matrix, high matrix
///   residual features
///   residual dictionary
///
/// Matrices are (u64 rows, u64 cols, rows*cols f64 column-major).
inline constexpr char kModelMagic[8] = {'D', 'D', 'S', 'R', 'M', 'O', 'D', 'L'};

std::vector<std::uint8_t> encode_model(const SRModel& model);
SRModel decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const SRModel& model, const std::filesystem::path& path);
SRModel load_model(const std::filesystem::path& path);

}  // namespace ddsr
