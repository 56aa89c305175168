#pragma once

#include <filesystem>

#include "ddsr/image.hpp"

namespace ddsr {

/// Reads an 8-bit PNG or binary/ASCII PGM. Colour PNGs are reduced to
/// luminance Y = 0.299 R + 0.587 G + 0.114 B; samples map to v / 255.
/// Throws IoError on unreadable files and unsupported bit depths.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale image; format follows the extension (.pgm,
/// anything else is PNG). Values are clamped to [0,1] and rounded to the
/// nearest of 256 levels.
void save_image(const Plane& img, const std::filesystem::path& path);

/// round(clamp(v) * 255) / 255 applied per pixel.
GrayImage quantize_8bit(const Plane& img);

/// Luminance of an 8-bit RGB triple, in [0,1].
double luminance(unsigned char r, unsigned char g, unsigned char b) noexcept;

}  // namespace ddsr
