#pragma once

#include <filesystem>

#include "f2v/core/types.hpp"

namespace f2v {

// Middlebury .flo container: "PIEH", int32 width, int32 height, then
// row-major interleaved float32 (u, v); all little-endian.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

}  // namespace f2v
