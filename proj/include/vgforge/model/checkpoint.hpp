#pragma once

// Checkpoint file, all integers u32 little-endian:
//   "VGCK" magic, version (1)
//   config JSON length, config JSON bytes
//   tensor count, then per tensor: name length, name bytes, rows, cols,
//   rows * cols float64 little-endian in row-major order

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vgforge/model/encoder.hpp"

namespace vgforge::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const EncoderParams& params);
/// Throws IoError on bad magic, unsupported version, truncation or layout mismatch.
EncoderParams decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace vgforge::model
