#pragma once

#include <string>

#include "c4/color.hpp"

namespace c4 {

// 16-bit RGB PNG, linear values mapped as v = integer / 65535.
// read_png also accepts 8-bit RGB(A) input (v = integer / 255).
LinearImage read_png(const std::string& path);
void write_png16(const LinearImage& image, const std::string& path);

// 8-bit grayscale mask PNG: nonzero = masked (excluded).
// Loads into image.mask; dimensions must match.
void read_mask_png(LinearImage& image, const std::string& path);
void write_mask_png(const LinearImage& image, const std::string& path);

// ASCII float raster for lossless round trips in tests. Header line
// "C4PF <width> <height>" followed by h*w*3 whitespace-separated values
// in row-major RGB order, printed with enough digits to round-trip
// doubles exactly.
LinearImage read_pfm_text(const std::string& path);
void write_pfm_text(const LinearImage& image, const std::string& path);

} // namespace c4
