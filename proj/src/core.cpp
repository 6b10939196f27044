#include "pmri/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

namespace pmri {

FormatError::FormatError(std::string const &what, std::size_t byte_offset)
  : Error(fmt::format("{} (at byte offset {})", what, byte_offset))
  , offset{byte_offset}
{
}

InsufficientAcs::InsufficientAcs(std::string const &what, int min_rows)
  : Error(fmt::format("{}: need at least {} fully sampled rows", what, min_rows))
  , required_rows{min_rows}
{
}

SamplingPattern SamplingPattern::centered(int ny, int rate, int acs_count, int offset)
{
  return SamplingPattern{rate, offset, central_start(ny, acs_count), acs_count};
}

bool SamplingPattern::on_grid(int y) const
{
  int const d = (y - offset) % rate;
  return d == 0;
}

bool SamplingPattern::in_acs(int y) const { return y >= acs_start && y < acs_start + acs_count; }

void SamplingPattern::validate(int ny) const
{
  if (rate < 1) {
    throw InvalidArgument(fmt::format("undersampling rate must be >= 1, got {}", rate));
  }
  if (offset < 0 || offset >= rate) {
    throw InvalidArgument(fmt::format("grid offset must lie in [0, {}), got {}", rate, offset));
  }
  if (acs_count < 0) {
    throw InvalidArgument(fmt::format("ACS line count must be >= 0, got {}", acs_count));
  }
  if (offset >= ny) {
    throw DimensionError(fmt::format("grid offset {} outside {} phase-encode lines", offset, ny));
  }
  if (acs_count > 0 && (acs_start < 0 || acs_start + acs_count > ny)) {
    throw DimensionError(
      fmt::format("ACS block [{}, {}) exceeds {} phase-encode lines", acs_start, acs_start + acs_count, ny));
  }
}

std::vector<int> SamplingPattern::acquired_lines(int ny) const
{
  std::vector<int> out;
  for (int y = 0; y < ny; y++) {
    if (acquired(y)) {
      out.push_back(y);
    }
  }
  return out;
}

std::vector<int> SamplingPattern::missing_lines(int ny) const
{
  std::vector<int> out;
  for (int y = 0; y < ny; y++) {
    if (!acquired(y)) {
      out.push_back(y);
    }
  }
  return out;
}

LineMask::LineMask(int coils, int ny)
  : coils_{coils}
  , ny_{ny}
  , bits_(std::size_t(coils) * ny, 0)
{
}

LineMask LineMask::from_pattern(SamplingPattern const &p, int coils, int ny)
{
  p.validate(ny);
  LineMask m(coils, ny);
  for (int c = 0; c < coils; c++) {
    for (int y = 0; y < ny; y++) {
      m.set(c, y, p.acquired(y));
    }
  }
  return m;
}

int central_start(int n, int count) { return (n - count + 1) / 2; }

namespace {

void check_mask(MultiCoilKspace const &ksp, LineMask const &mask)
{
  if (mask.coils() != ksp.coils() || mask.ny() != ksp.ny()) {
    throw DimensionError(fmt::format("line mask {}x{} does not match k-space {}x{}x{}", mask.coils(), mask.ny(),
                                     ksp.coils(), ksp.ny(), ksp.nx()));
  }
}

} // namespace

MultiCoilKspace zero_fill(MultiCoilKspace const &ksp, SamplingPattern const &pattern)
{
  return zero_fill(ksp, LineMask::from_pattern(pattern, ksp.coils(), ksp.ny()));
}

MultiCoilKspace zero_fill(MultiCoilKspace const &ksp, LineMask const &mask)
{
  check_mask(ksp, mask);
  MultiCoilKspace out(ksp.coils(), ksp.ny(), ksp.nx());
  for (int c = 0; c < ksp.coils(); c++) {
    for (int y = 0; y < ksp.ny(); y++) {
      if (mask(c, y)) {
        std::ranges::copy(ksp.row(c, y), out.row(c, y).begin());
      }
    }
  }
  return out;
}

MultiCoilKspace extract_rows(MultiCoilKspace const &ksp, int start, int count)
{
  if (count < 1 || start < 0 || start + count > ksp.ny()) {
    throw InvalidArgument(fmt::format("row range [{}, {}) invalid for {} rows", start, start + count, ksp.ny()));
  }
  MultiCoilKspace out(ksp.coils(), count, ksp.nx());
  for (int c = 0; c < ksp.coils(); c++) {
    for (int y = 0; y < count; y++) {
      std::ranges::copy(ksp.row(c, start + y), out.row(c, y).begin());
    }
  }
  return out;
}

MultiCoilKspace extract_central_lines(MultiCoilKspace const &ksp, int count)
{
  if (count > ksp.ny() || count < 1) {
    throw InvalidArgument(fmt::format("cannot extract {} central lines from {} rows", count, ksp.ny()));
  }
  return extract_rows(ksp, central_start(ksp.ny(), count), count);
}

MultiCoilKspace reinsert_lines(MultiCoilKspace const &recon, MultiCoilKspace const &original,
                               SamplingPattern const &pattern)
{
  return reinsert_lines(recon, original, LineMask::from_pattern(pattern, original.coils(), original.ny()));
}

MultiCoilKspace reinsert_lines(MultiCoilKspace const &recon, MultiCoilKspace const &original, LineMask const &mask)
{
  if (!recon.same_shape(original)) {
    throw DimensionError("reinsert_lines: reconstruction and original extents differ");
  }
  check_mask(original, mask);
  MultiCoilKspace out = recon;
  for (int c = 0; c < out.coils(); c++) {
    for (int y = 0; y < out.ny(); y++) {
      if (mask(c, y)) {
        std::ranges::copy(original.row(c, y), out.row(c, y).begin());
      }
    }
  }
  return out;
}

namespace {

std::mutex planner_mutex;

// In-place unnormalized 2-D DFT of every (ny x nx) plane in `buf`.
void dft_planes(std::vector<Cx> &buf, int planes, int ny, int nx, int sign)
{
  int dims[2] = {ny, nx};
  auto *ptr = reinterpret_cast<fftw_complex *>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_many_dft(2, dims, planes, ptr, nullptr, 1, ny * nx, ptr, nullptr, 1, ny * nx, sign,
                              FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
}

// Centered storage index <-> DFT index: k = (y - n/2) mod n.
template <typename In>
std::vector<Cx> to_dft_order(In const &src)
{
  int const ny = src.ny(), nx = src.nx(), cy = ny / 2, cx = nx / 2;
  std::vector<Cx> buf(src.size());
  for (int c = 0; c < src.coils(); c++) {
    Cx *plane = buf.data() + std::size_t(c) * ny * nx;
    for (int ky = 0; ky < ny; ky++) {
      int const y = (ky + cy) % ny;
      for (int kx = 0; kx < nx; kx++) {
        plane[std::size_t(ky) * nx + kx] = src(c, y, (kx + cx) % nx);
      }
    }
  }
  return buf;
}

template <typename Out>
Out from_dft_order(std::vector<Cx> const &buf, int coils, int ny, int nx, double scale)
{
  int const cy = ny / 2, cx = nx / 2;
  Out out(coils, ny, nx);
  for (int c = 0; c < coils; c++) {
    Cx const *plane = buf.data() + std::size_t(c) * ny * nx;
    for (int ky = 0; ky < ny; ky++) {
      int const y = (ky + cy) % ny;
      for (int kx = 0; kx < nx; kx++) {
        out(c, y, (kx + cx) % nx) = plane[std::size_t(ky) * nx + kx] * scale;
      }
    }
  }
  return out;
}

void hermitian_symmetrize(Cx *plane, int ny, int nx)
{
  std::vector<Cx> sym(std::size_t(ny) * nx);
  for (int ky = 0; ky < ny; ky++) {
    int const my = (ny - ky) % ny;
    for (int kx = 0; kx < nx; kx++) {
      int const mx = (nx - kx) % nx;
      sym[std::size_t(ky) * nx + kx] = 0.5 * (plane[std::size_t(ky) * nx + kx] + std::conj(plane[std::size_t(my) * nx + mx]));
    }
  }
  std::ranges::copy(sym, plane);
}

} // namespace

ImageStack ifft2c(MultiCoilKspace const &ksp)
{
  auto buf = to_dft_order(ksp);
  dft_planes(buf, ksp.coils(), ksp.ny(), ksp.nx(), FFTW_BACKWARD);
  return from_dft_order<ImageStack>(buf, ksp.coils(), ksp.ny(), ksp.nx(), 1.0 / std::sqrt(double(ksp.ny()) * ksp.nx()));
}

MultiCoilKspace fft2c(ImageStack const &img)
{
  int const ny = img.ny(), nx = img.nx();
  auto buf = to_dft_order(img);
  dft_planes(buf, img.coils(), ny, nx, FFTW_FORWARD);
  for (int c = 0; c < img.coils(); c++) {
    auto const coil = img.coil(c);
    bool const real = std::ranges::all_of(coil, [](Cx v) { return v.imag() == 0.0; });
    if (real) {
      hermitian_symmetrize(buf.data() + std::size_t(c) * ny * nx, ny, nx);
    }
  }
  return from_dft_order<MultiCoilKspace>(buf, img.coils(), ny, nx, 1.0 / std::sqrt(double(ny) * nx));
}

RealImage rss_combine(ImageStack const &img, int n_keep)
{
  if (n_keep < 1 || n_keep > img.coils()) {
    throw InvalidArgument(fmt::format("rss_combine: n_keep {} outside [1, {}]", n_keep, img.coils()));
  }
  RealImage out = RealImage::Zero(img.ny(), img.nx());
  for (int c = 0; c < n_keep; c++) {
    for (int y = 0; y < img.ny(); y++) {
      for (int x = 0; x < img.nx(); x++) {
        out(y, x) += std::norm(img(c, y, x));
      }
    }
  }
  return out.sqrt();
}

RealImage rss_combine(ImageStack const &img) { return rss_combine(img, img.coils()); }

template <typename Tag>
bool bit_equal(CoilArray<Tag> const &a, CoilArray<Tag> const &b)
{
  return a.same_shape(b) && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(Cx)) == 0;
}

template bool bit_equal(CoilArray<KspaceTag> const &, CoilArray<KspaceTag> const &);
template bool bit_equal(CoilArray<ImageTag> const &, CoilArray<ImageTag> const &);

bool acquired_lines_equal(MultiCoilKspace const &a, MultiCoilKspace const &b, LineMask const &mask)
{
  if (!a.same_shape(b)) {
    return false;
  }
  check_mask(a, mask);
  for (int c = 0; c < a.coils(); c++) {
    for (int y = 0; y < a.ny(); y++) {
      if (mask(c, y) && std::memcmp(a.row(c, y).data(), b.row(c, y).data(), a.nx() * sizeof(Cx)) != 0) {
        return false;
      }
    }
  }
  return true;
}

bool all_finite(MultiCoilKspace const &ksp)
{
  return std::ranges::all_of(ksp.data(), [](Cx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double max_abs(MultiCoilKspace const &ksp)
{
  double m = 0.0;
  for (auto v : ksp.data()) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

} // namespace pmri
