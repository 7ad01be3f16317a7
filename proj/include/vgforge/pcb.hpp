#pragma once

// .pcb point-cloud file:
//   "VGPC"  magic, 4 bytes
//   u32     version (little-endian), currently 1
//   u32     point count
//   count x 3 float32 little-endian (x, y, z row-major)

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vgforge/ifs.hpp"

namespace vgforge::pcb {

inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 12;

std::vector<std::uint8_t> encode(const PointCloud& pc);

/// Coordinates come back as the float32 values that were stored.
PointCloud decode(std::span<const std::uint8_t> bytes);

void write(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read(const std::filesystem::path& path);

}  // namespace vgforge::pcb
