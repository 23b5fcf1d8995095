#pragma once

#include <filesystem>
#include <string>

#include "puma/raster.hpp"

namespace puma {

/// Decode an 8-bit indexed-color (or grayscale) PNG into a label mask; the
/// palette index / gray value is the class index. Anything else is rejected
/// with unsupported_image_format.
LabelMask read_mask(const std::string& bytes);

/// Encode as an 8-bit paletted PNG, pixel value = class index. The palette
/// colors are cosmetic (see docs/formats.md); round-trips are lossless.
std::string write_mask(const LabelMask& mask);

LabelMask read_mask_file(const std::filesystem::path& path);
void write_mask_file(const LabelMask& mask, const std::filesystem::path& path);

}  // namespace puma
