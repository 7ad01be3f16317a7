#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vgforge/projection.hpp"

namespace vgforge {

/// 8-bit RGB PNG, no alpha, fixed compression settings so output bytes are stable.
std::vector<std::uint8_t> encode_png(const projection::FractalImage& img);

/// Decodes an 8-bit RGB PNG. Throws IoError on malformed input or other formats.
projection::FractalImage decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace vgforge
