#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddsr/pipeline.hpp"

namespace ddsr {

struct BenchRow {
  std::string name;
  double psnr_bicubic = 0.0;
  double psnr_single = 0.0;
  double psnr_dual = 0.0;
  double gain = 0.0;  // psnr_dual - psnr_single
};

/// Per-image PSNRs (dB, full image, no border trim) plus their mean.
struct BenchReport {
  std::vector<BenchRow> rows;
  std::optional<BenchRow> average;  // absent for an empty report
};

/// Crops each original to a multiple of the scale, degrades it with the
/// model's own blur/decimation, then scores clamped bicubic, single-layer
/// and dual-layer reconstructions against the crop.
BenchReport run_benchmark(const SRModel& model, const std::vector<GrayImage>& test_images,
                          const std::vector<std::string>& names);

/// CSV: '#' comment lines, then name,bicubic_db,single_db,dual_db,gain_db,
/// one row per image and a final "average" row.
void write_report_csv(const BenchReport& report, std::ostream& out);

/// Fixed-width table for terminals.
void print_report(const BenchReport& report, std::ostream& out);

}  // namespace ddsr
