#include "vgforge/pcb.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"

namespace vgforge::pcb {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode(const PointCloud& pc) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + pc.size() * 12);
  for (char c : {'V', 'G', 'P', 'C'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(pc.size()));
  for (const auto& p : pc.points)
    for (double v : p) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

PointCloud decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw IoError("pcb: truncated header");
  if (std::memcmp(bytes.data(), "VGPC", 4) != 0) throw IoError("pcb: bad magic");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kVersion) throw IoError("pcb: unsupported version " + std::to_string(version));
  const std::uint32_t count = get_u32(bytes.data() + 8);
  if (bytes.size() != kHeaderBytes + static_cast<std::size_t>(count) * 12)
    throw IoError("pcb: size does not match point count " + std::to_string(count));
  PointCloud pc;
  pc.points.resize(count);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (auto& pt : pc.points)
    for (double& v : pt) {
      v = static_cast<double>(std::bit_cast<float>(get_u32(p)));
      p += 4;
    }
  return pc;
}

void write(const std::filesystem::path& path, const PointCloud& pc) { write_file_atomic(path, encode(pc)); }

PointCloud read(const std::filesystem::path& path) {
  try {
    return decode(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace vgforge::pcb
