#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imagecore/image.hpp"

namespace cuedecomp {

enum class RasterFormat { png, jpeg, pnm, unknown };

RasterFormat sniff_format(std::span<const std::uint8_t> bytes);

// 8-bit containers only; intensities are stored/255.
Image decode_image(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");
Image load_image(const std::string& path);

// Round-half-up quantization. Format follows the extension: .png (default)
// or .pgm/.ppm; lossy containers are refused.
void save_image(const Image& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const Image& img);

// Masks: grayscale (8 or 16 bit) or palette PNG, or binary PGM.
LabelMask load_mask(const std::string& path);
void save_mask(const LabelMask& mask, const std::string& path);

std::uint8_t quantize(double v);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace cuedecomp
