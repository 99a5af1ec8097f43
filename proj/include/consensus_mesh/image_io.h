#pragma once

#include <string>

#include "consensus_mesh/raster.h"

namespace consensus {

/// 8-bit PNG. Values are clamped to [0, 1] and rounded on write.
void write_png(const std::string& path, const ImageRGB& image);
void write_png(const std::string& path, const Mask& mask);  // grayscale
ImageRGB read_png_rgb(const std::string& path);              // any color type, alpha dropped
Mask read_png_mask(const std::string& path);                 // luminance of any color type

/// Palette-indexed PNG holding label ids directly (0..255).
void write_label_png(const std::string& path, const LabelMap& labels);
/// Palette indices, or gray levels for grayscale files.
LabelMap read_label_png(const std::string& path);

/// Single-channel little-endian PFM ("Pf", scale -1, rows stored bottom-up).
void write_pfm(const std::string& path, const Grid& map);
Grid read_pfm(const std::string& path);

/// Resamples to the given size by averaging the source area under each
/// destination pixel.
ImageRGB resample(const ImageRGB& src, int width, int height);
Mask resample(const Mask& src, int width, int height);

}  // namespace consensus
