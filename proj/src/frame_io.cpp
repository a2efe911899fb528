#include "rts_sph/frame_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rts {

namespace {

static_assert(std::endian::native == std::endian::little, "frame files are written natively");

template <typename T>
void put(std::vector<char>& buf, T value) {
  const auto* raw = reinterpret_cast<const char*>(&value);
  buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <typename T>
T take(const std::vector<char>& buf, std::size_t& at) {
  if (at + sizeof(T) > buf.size()) throw std::runtime_error("truncated frame file");
  T value;
  std::memcpy(&value, buf.data() + at, sizeof(T));
  at += sizeof(T);
  return value;
}

}  // namespace

std::string frame_file_name(std::uint32_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%05u.bin", index);
  return name;
}

void write_frame(const std::filesystem::path& file, std::uint32_t index, double time,
                 std::span<const Vec3> positions, std::span<const std::uint8_t> regions) {
  if (regions.size() != positions.size()) throw std::invalid_argument("one region per particle");
  std::vector<char> buf;
  buf.reserve(24 + positions.size() * 13);
  buf.insert(buf.end(), {'R', 'T', 'S', 'F'});
  put<std::uint32_t>(buf, kFrameVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(positions.size()));
  put<std::uint32_t>(buf, index);
  put<double>(buf, time);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    put<float>(buf, static_cast<float>(positions[i].x));
    put<float>(buf, static_cast<float>(positions[i].y));
    put<float>(buf, static_cast<float>(positions[i].z));
    put<std::uint8_t>(buf, regions[i]);
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Frame read_frame(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), "RTSF", 4) != 0) {
    throw std::runtime_error(file.string() + " is not a frame file");
  }
  std::size_t at = 4;
  if (take<std::uint32_t>(buf, at) != kFrameVersion) throw std::runtime_error("unknown frame version");
  const auto count = take<std::uint32_t>(buf, at);
  Frame f;
  f.index = take<std::uint32_t>(buf, at);
  f.time = take<double>(buf, at);
  f.positions.resize(count);
  f.regions.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    f.positions[i][0] = take<float>(buf, at);
    f.positions[i][1] = take<float>(buf, at);
    f.positions[i][2] = take<float>(buf, at);
    f.regions[i] = take<std::uint8_t>(buf, at);
  }
  if (at != buf.size()) throw std::runtime_error("trailing bytes in frame file");
  return f;
}

Vec3 center_of_mass(std::span<const Vec3> positions) {
  Vec3 sum;
  for (const Vec3& x : positions) sum += x;
  return positions.empty() ? sum : sum * (1.0 / static_cast<double>(positions.size()));
}

Vec3 center_of_mass(const Frame& frame) {
  Vec3 sum;
  for (const auto& p : frame.positions) sum += Vec3(p[0], p[1], p[2]);
  return frame.positions.empty() ? sum : sum * (1.0 / static_cast<double>(frame.positions.size()));
}

}  // namespace rts
