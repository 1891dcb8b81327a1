#include "f2v/ingest/flo.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "f2v/core/errors.hpp"

namespace f2v {
namespace {

constexpr char kMagic[4] = {'P', 'I', 'E', 'H'};

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

}  // namespace

FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open flow file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto fail = [&](std::size_t offset, const std::string& what) {
    throw FormatError(path.string() + ": " + what + " at byte offset " + std::to_string(offset));
  };
  if (bytes.size() < 12) fail(bytes.size(), "truncated header (need 12 bytes)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(0, "bad magic tag (expected PIEH)");

  const auto width = static_cast<std::int32_t>(load_u32_le(bytes.data() + 4));
  const auto height = static_cast<std::int32_t>(load_u32_le(bytes.data() + 8));
  if (width <= 0 || width > (1 << 16)) fail(4, "implausible width " + std::to_string(width));
  if (height <= 0 || height > (1 << 16)) fail(8, "implausible height " + std::to_string(height));

  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t expected = 12 + count * 8;
  if (bytes.size() < expected) fail(bytes.size(), "truncated payload (expected " + std::to_string(expected) + " bytes)");

  FlowField flow(height, width);
  const unsigned char* p = bytes.data() + 12;
  for (std::size_t i = 0; i < count; ++i) {
    flow.u[i] = std::bit_cast<float>(load_u32_le(p));
    flow.v[i] = std::bit_cast<float>(load_u32_le(p + 4));
    p += 8;
  }
  return flow;
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
  const std::size_t count = static_cast<std::size_t>(flow.width) * flow.height;
  if (flow.u.size() != count || flow.v.size() != count) throw ShapeError("flow buffers do not match dimensions");

  std::vector<unsigned char> bytes(12 + count * 8);
  std::memcpy(bytes.data(), kMagic, 4);
  store_u32_le(bytes.data() + 4, static_cast<std::uint32_t>(flow.width));
  store_u32_le(bytes.data() + 8, static_cast<std::uint32_t>(flow.height));
  unsigned char* p = bytes.data() + 12;
  for (std::size_t i = 0; i < count; ++i) {
    store_u32_le(p, std::bit_cast<std::uint32_t>(flow.u[i]));
    store_u32_le(p + 4, std::bit_cast<std::uint32_t>(flow.v[i]));
    p += 8;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write flow file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace f2v
