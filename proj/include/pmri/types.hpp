#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pmri {

using Cx = std::complex<double>;

// Real-valued 2-D images (magnitude, masks) are row-major Eigen arrays indexed (y, x).
using RealImage = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BoolImage = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error
{
  using Error::Error;
};

struct InvalidArgument : Error
{
  using Error::Error;
};

struct FormatError : Error
{
  FormatError(std::string const &what, std::size_t byte_offset);
  std::size_t offset;
};

struct InsufficientAcs : Error
{
  InsufficientAcs(std::string const &what, int min_rows);
  int required_rows;
};

// File could not be opened, read or written.
struct IoError : Error
{
  using Error::Error;
};

struct SolverError : Error
{
  using Error::Error;
};

struct UndefinedMetric : Error
{
  using Error::Error;
};

/*
 * Dense complex (coil, y, x) array. Coil-major, then phase-encode row, then readout.
 * The tag separates k-space from image-domain stacks at the type level.
 */
template <typename Tag>
class CoilArray
{
public:
  CoilArray() = default;
  CoilArray(int coils, int ny, int nx)
    : coils_{coils}
    , ny_{ny}
    , nx_{nx}
  {
    if (coils < 1 || ny < 1 || nx < 1) {
      throw DimensionError("coil array extents must all be >= 1, got " + std::to_string(coils) + "x" +
                           std::to_string(ny) + "x" + std::to_string(nx));
    }
    data_.assign(std::size_t(coils) * std::size_t(ny) * std::size_t(nx), Cx{0.0, 0.0});
  }

  int coils() const { return coils_; }
  int ny() const { return ny_; }
  int nx() const { return nx_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Cx &operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  Cx const &operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<Cx> row(int c, int y) { return {data_.data() + index(c, y, 0), std::size_t(nx_)}; }
  std::span<Cx const> row(int c, int y) const { return {data_.data() + index(c, y, 0), std::size_t(nx_)}; }

  std::span<Cx> coil(int c) { return {data_.data() + index(c, 0, 0), std::size_t(ny_) * nx_}; }
  std::span<Cx const> coil(int c) const { return {data_.data() + index(c, 0, 0), std::size_t(ny_) * nx_}; }

  std::span<Cx> data() { return data_; }
  std::span<Cx const> data() const { return data_; }

  bool same_shape(CoilArray const &o) const { return coils_ == o.coils_ && ny_ == o.ny_ && nx_ == o.nx_; }

  CoilArray &operator*=(Cx s)
  {
    for (auto &v : data_) {
      v *= s;
    }
    return *this;
  }

  friend CoilArray operator*(Cx s, CoilArray a) { return a *= s; }

private:
  std::size_t index(int c, int y, int x) const
  {
    return (std::size_t(c) * ny_ + std::size_t(y)) * nx_ + std::size_t(x);
  }

  int coils_ = 0;
  int ny_ = 0;
  int nx_ = 0;
  std::vector<Cx> data_;
};

struct KspaceTag;
struct ImageTag;
using MultiCoilKspace = CoilArray<KspaceTag>;
using ImageStack = CoilArray<ImageTag>;

/*
 * Uniform Cartesian undersampling along phase-encode plus a contiguous block of ACS lines.
 * Acquired set = {y : (y - offset) mod rate == 0} U [acs_start, acs_start + acs_count).
 */
struct SamplingPattern
{
  int rate = 1;
  int offset = 0;
  int acs_start = 0;
  int acs_count = 0;

  // ACS block placed at ceil((ny - acs_count) / 2).
  static SamplingPattern centered(int ny, int rate, int acs_count, int offset = 0);

  bool on_grid(int y) const;
  bool in_acs(int y) const;
  bool acquired(int y) const { return on_grid(y) || in_acs(y); }

  // Throws InvalidArgument for a bad rate/offset and DimensionError when lines fall outside [0, ny).
  void validate(int ny) const;

  std::vector<int> acquired_lines(int ny) const;
  std::vector<int> missing_lines(int ny) const;

  bool operator==(SamplingPattern const &) const = default;
};

// Per-coil record of which phase-encode lines were measured.
class LineMask
{
public:
  LineMask() = default;
  LineMask(int coils, int ny);
  static LineMask from_pattern(SamplingPattern const &p, int coils, int ny);

  int coils() const { return coils_; }
  int ny() const { return ny_; }
  bool operator()(int c, int y) const { return bits_[std::size_t(c) * ny_ + y] != 0; }
  void set(int c, int y, bool v) { bits_[std::size_t(c) * ny_ + y] = v ? 1 : 0; }

private:
  int coils_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> bits_;
};

} // namespace pmri
