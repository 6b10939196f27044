#include "pmri/windows.hpp"

#include <fmt/format.h>

namespace pmri {

void KernelGeometry::validate() const
{
  if (ky < 2) {
    throw InvalidArgument(fmt::format("kernel needs >= 2 source lines, got {}", ky));
  }
  if (kx < 1 || kx % 2 == 0) {
    throw InvalidArgument(fmt::format("readout kernel width must be odd, got {}", kx));
  }
  if (rate < 1) {
    throw InvalidArgument(fmt::format("undersampling rate must be >= 1, got {}", rate));
  }
}

std::vector<Window> calibration_windows(int rows, KernelGeometry const &geom)
{
  std::vector<Window> out;
  for (int a = 0; a + (geom.ky - 1) * geom.rate < rows; a++) {
    Window w{a, {}};
    for (int j = 0; j < geom.ky; j++) {
      w.sources.push_back(a + j * geom.rate);
    }
    out.push_back(std::move(w));
  }
  return out;
}

int GridCover::target_row(Window const &w, int r, int ny, KernelGeometry const &geom) const
{
  int const y = w.anchor + geom.target_gap() * geom.rate + r;
  if (periodic) {
    return ((y % ny) + ny) % ny;
  }
  return (y >= 0 && y < ny) ? y : -1;
}

GridCover grid_windows(int ny, int offset, KernelGeometry const &geom)
{
  int const R = geom.rate, g = geom.target_gap();
  GridCover cover;
  cover.periodic = ny % R == 0;
  auto src_row = [&](int y) {
    if (cover.periodic) {
      return ((y % ny) + ny) % ny;
    }
    return (y >= 0 && y < ny) ? y : -1;
  };
  int first = offset, last = offset;
  if (cover.periodic) {
    last = offset + (ny / R - 1) * R;
  } else {
    // Extend the anchor range so the lines before the first and after the last grid line are covered.
    while (first + g * R + R - 1 >= 0) {
      first -= R;
    }
    first += R;
    while (last + g * R + 1 <= ny - 1) {
      last += R;
    }
    last -= R;
  }
  for (int a = first; a <= last; a += R) {
    Window w{a, {}};
    for (int j = 0; j < geom.ky; j++) {
      w.sources.push_back(src_row(a + j * R));
    }
    cover.windows.push_back(std::move(w));
  }
  return cover;
}

Eigen::MatrixXcd gather_patches(MultiCoilKspace const &ksp, std::vector<Window> const &windows, int kx, int pad)
{
  int const nc = ksp.coils(), nx = ksp.nx();
  int const n_out = nx + 2 * pad - kx + 1;
  if (windows.empty() || n_out < 1) {
    throw InvalidArgument("gather_patches: no output positions");
  }
  int const ky = int(windows.front().sources.size());
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(Eigen::Index(nc) * ky * kx, Eigen::Index(windows.size()) * n_out);
  for (std::size_t w = 0; w < windows.size(); w++) {
    for (int c = 0; c < nc; c++) {
      for (int j = 0; j < ky; j++) {
        int const row = windows[w].sources[std::size_t(j)];
        if (row < 0) {
          continue;
        }
        Cx const *src = ksp.row(c, row).data();
        for (int t = 0; t < kx; t++) {
          Eigen::Index const f = (Eigen::Index(c) * ky + j) * kx + t;
          int const lo = std::max(0, pad - t), hi = std::min(n_out, nx + pad - t);
          for (int xo = lo; xo < hi; xo++) {
            P(f, Eigen::Index(w) * n_out + xo) = src[xo + t - pad];
          }
        }
      }
    }
  }
  return P;
}

} // namespace pmri
