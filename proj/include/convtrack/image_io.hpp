#pragma once

#include <string>

#include "convtrack/image.hpp"

namespace convtrack {

// Decode a raster file (PNM ascii/binary, PNG, JPEG — sniffed by magic bytes)
// and return it as grayscale in [0,1]; color input goes through to_gray.
GrayImage load_frame(const std::string& path);

// 8-bit binary PGM, values clamped to [0,1] and quantized by rounding.
void write_pgm(const GrayImage& img, const std::string& path);

} // namespace convtrack
