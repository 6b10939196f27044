#include "pmri/image_io.hpp"

#include <cmath>
#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

#include "pmri/ksp_io.hpp"

namespace pmri {

void save_pgm(RealImage const &img, std::filesystem::path const &path)
{
  std::string const header = fmt::format("P5\n{} {}\n255\n", img.cols(), img.rows());
  std::vector<char> bytes(header.begin(), header.end());
  double const peak = img.size() ? img.maxCoeff() : 0.0;
  for (Eigen::Index y = 0; y < img.rows(); y++) {
    for (Eigen::Index x = 0; x < img.cols(); x++) {
      double const v = peak > 0.0 ? std::clamp(img(y, x) / peak, 0.0, 1.0) : 0.0;
      bytes.push_back(char(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  write_file(path, bytes);
}

void save_pfm(RealImage const &img, std::filesystem::path const &path)
{
  std::string const header = fmt::format("Pf\n{} {}\n-1.0\n", img.cols(), img.rows());
  std::vector<char> bytes(header.begin(), header.end());
  std::size_t at = bytes.size();
  bytes.resize(at + std::size_t(img.size()) * 4);
  for (Eigen::Index y = img.rows() - 1; y >= 0; y--) {
    for (Eigen::Index x = 0; x < img.cols(); x++) {
      float const f = float(img(y, x));
      std::memcpy(bytes.data() + at, &f, 4);
      at += 4;
    }
  }
  write_file(path, bytes);
}

RealImage load_pfm(std::filesystem::path const &path)
{
  auto const bytes = read_file(path);
  // header: three whitespace-separated tokens after the magic, then a single whitespace byte
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      pos++;
    }
    std::size_t const start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      pos++;
    }
    if (start == pos) {
      throw FormatError(fmt::format("{}: truncated float map header", path.string()), pos);
    }
    return std::string(bytes.data() + start, pos - start);
  };
  if (token() != "Pf") {
    throw FormatError(fmt::format("{}: not a grayscale float map", path.string()), 0);
  }
  std::size_t const dims_at = pos;
  long nx = 0, ny = 0;
  double scale = 0.0;
  try {
    nx = std::stol(token());
    ny = std::stol(token());
    scale = std::stod(token());
  } catch (std::logic_error const &) {
    throw FormatError(fmt::format("{}: malformed float map header", path.string()), dims_at);
  }
  if (nx < 1 || ny < 1 || nx > (1 << 16) || ny > (1 << 16)) {
    throw FormatError(fmt::format("{}: invalid float map extents {}x{}", path.string(), nx, ny), dims_at);
  }
  if (scale >= 0.0) {
    throw FormatError(fmt::format("{}: big-endian float maps are not supported", path.string()), dims_at);
  }
  pos++;
  std::size_t const need = std::size_t(nx) * std::size_t(ny) * 4;
  if (bytes.size() != pos + need) {
    throw FormatError(fmt::format("{}: float map payload is {} bytes, expected {}", path.string(), bytes.size() - pos, need),
                      bytes.size());
  }
  RealImage img(ny, nx);
  for (long y = ny - 1; y >= 0; y--) {
    for (long x = 0; x < nx; x++) {
      float f;
      std::memcpy(&f, bytes.data() + pos, 4);
      pos += 4;
      img(y, x) = f;
    }
  }
  return img;
}

} // namespace pmri
