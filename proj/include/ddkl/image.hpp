#pragma once

#include <string>

#include "ddkl/multires.hpp"

namespace ddkl {

// Binary portable graymap/pixmap, 8-bit, maxval 255. Pixel values are mapped
// to [0,1] on read; writes clamp to [0,1] then round(v * 255).
Image read_pnm(const std::string& path);
void write_pnm(const Image& img, const std::string& path);

// Raw little-endian f32 with a 16-byte header: magic "DDKF", width, height,
// channels as u32.
Image read_raw_f32(const std::string& path);
void write_raw_f32(const Image& img, const std::string& path);

// Quantization rule shared by the PNM writer.
unsigned char quantize_8bit(double v);

}  // namespace ddkl
