#pragma once

#include <string>

#include "igs/image.hpp"

namespace igs {

/// Reads an 8- or 16-bit PNG into [0,1] floats (v/255 or v/65535).
/// Grayscale and palette images expand to RGB; alpha is dropped.
ImageBuffer load_image(const std::string& path);

/// Writes an RGB PNG at the given bit depth (8 or 16), rounding to nearest.
void save_image(const ImageBuffer& img, const std::string& path, int bit_depth = 8);

}  // namespace igs
