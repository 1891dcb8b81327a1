#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "f2v/core/types.hpp"

namespace f2v {

/// Reads any PNG as 3-channel RGB with values v / 255.
Image read_png_rgb(const std::filesystem::path& path);

/// Writes a 3-channel image in [0,1] as 8-bit RGB (round(v * 255)).
void write_png_rgb(const std::filesystem::path& path, const Image& image);

/// Writes a single-channel 8-bit grayscale PNG from row-major bytes.
void write_png_gray(const std::filesystem::path& path, int height, int width,
                    const std::vector<std::uint8_t>& pixels);

std::uint8_t to_byte(float v);

}  // namespace f2v
