#include "pmri/ksp_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace pmri {

static_assert(std::endian::native == std::endian::little, "KSP1 codec assumes a little-endian host");

namespace {

constexpr char magic[4] = {'K', 'S', 'P', '1'};
constexpr std::size_t header_bytes = 16;

std::uint32_t get_u32(std::vector<char> const &in, std::size_t at)
{
  std::uint32_t v;
  std::memcpy(&v, in.data() + at, 4);
  return v;
}

} // namespace

std::vector<char> encode_ksp(MultiCoilKspace const &ksp)
{
  std::vector<char> out(header_bytes + ksp.size() * 8);
  char *p = out.data();
  std::memcpy(p, magic, 4);
  std::uint32_t const dims[3] = {std::uint32_t(ksp.coils()), std::uint32_t(ksp.ny()), std::uint32_t(ksp.nx())};
  std::memcpy(p + 4, dims, 12);
  p += header_bytes;
  for (Cx v : ksp.data()) {
    float const f[2] = {float(v.real()), float(v.imag())};
    std::memcpy(p, f, 8);
    p += 8;
  }
  return out;
}

MultiCoilKspace decode_ksp(std::vector<char> const &bytes)
{
  if (bytes.size() < 4) {
    throw FormatError("truncated KSP header", bytes.size());
  }
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw FormatError("bad magic, expected \"KSP1\"", 0);
  }
  if (bytes.size() < header_bytes) {
    throw FormatError("truncated KSP header", bytes.size());
  }
  std::uint32_t const dims[3] = {get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
  for (int i = 0; i < 3; i++) {
    if (dims[i] == 0 || dims[i] > std::uint32_t(std::numeric_limits<int>::max())) {
      throw FormatError(fmt::format("invalid extent {}", dims[i]), 4 + 4 * std::size_t(i));
    }
  }
  std::uint64_t const count = std::uint64_t(dims[0]) * dims[1] * dims[2];
  if (count > (std::uint64_t(1) << 40)) {
    throw FormatError("extent product overflows", 4);
  }
  std::uint64_t const expected = header_bytes + count * 8;
  if (bytes.size() < expected) {
    throw FormatError(fmt::format("truncated payload, expected {} bytes, have {}", expected, bytes.size()),
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes after payload", expected);
  }
  MultiCoilKspace ksp(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
  auto data = ksp.data();
  char const *p = bytes.data() + header_bytes;
  for (std::size_t i = 0; i < data.size(); i++, p += 8) {
    float f[2];
    std::memcpy(f, p, 8);
    data[i] = Cx{f[0], f[1]};
  }
  return ksp;
}

std::vector<char> read_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(fmt::format("cannot open {} for reading", path.string()));
  }
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_file(std::filesystem::path const &path, std::vector<char> const &bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot open {} for writing", path.string()));
  }
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) {
    throw IoError(fmt::format("short write to {}", path.string()));
  }
}

void save_ksp(MultiCoilKspace const &ksp, std::filesystem::path const &path) { write_file(path, encode_ksp(ksp)); }

MultiCoilKspace load_ksp(std::filesystem::path const &path) { return decode_ksp(read_file(path)); }

MultiCoilKspace quantize_f32(MultiCoilKspace const &ksp)
{
  MultiCoilKspace out = ksp;
  for (auto &v : out.data()) {
    v = Cx{double(float(v.real())), double(float(v.imag()))};
  }
  return out;
}

} // namespace pmri
