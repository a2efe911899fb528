#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rts_sph/vec3.hpp"

namespace rts {

/// One exported frame: positions rounded to float plus each particle's region.
///
/// File layout (little-endian): "RTSF", u32 version (1), u32 particle count,
/// u32 frame index, f64 time, then per particle 3 x f32 position and u8 region.
struct Frame {
  std::uint32_t index = 0;
  double time = 0.0;
  std::vector<std::array<float, 3>> positions;
  std::vector<std::uint8_t> regions;
};

inline constexpr std::uint32_t kFrameVersion = 1;

/// "frame_00012.bin"
std::string frame_file_name(std::uint32_t index);

void write_frame(const std::filesystem::path& file, std::uint32_t index, double time,
                 std::span<const Vec3> positions, std::span<const std::uint8_t> regions);
/// Throws std::runtime_error on a malformed file.
Frame read_frame(const std::filesystem::path& file);

Vec3 center_of_mass(std::span<const Vec3> positions);
Vec3 center_of_mass(const Frame& frame);

}  // namespace rts
