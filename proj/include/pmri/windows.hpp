#pragma once

#include <vector>

#include <Eigen/Core>

#include "types.hpp"

namespace pmri {

/*
 * Source/target layout shared by the GRAPPA kernel and the first RAKI layer.
 * Relative to an anchor row a on the acquisition grid:
 *   sources  a + j*rate,          j = 0..ky-1
 *   targets  a + g*rate + r,      r = 1..rate-1, g = ky/2 - 1
 *   taps     x + t - (kx-1)/2,    t = 0..kx-1
 */
struct KernelGeometry
{
  int ky = 2;
  int kx = 5;
  int rate = 4;

  int target_gap() const { return ky / 2 - 1; }
  int source_span() const { return (ky - 1) * rate + 1; }
  int n_features(int coils) const { return coils * ky * kx; }
  void validate() const;
};

// Source row list for one anchor; -1 marks a row outside the data, read as zeros.
struct Window
{
  int anchor = 0;
  std::vector<int> sources;
};

// Every anchor of a fully sampled block whose sources all fall inside the block.
std::vector<Window> calibration_windows(int rows, KernelGeometry const &geom);

/*
 * Anchors on the acquisition grid {offset + k*rate} covering every off-grid line exactly once.
 * When ny is a multiple of rate the phase-encode axis is treated as periodic, which is exact for
 * discretely sampled k-space. Otherwise rows outside [0, ny) read as zero.
 */
struct GridCover
{
  bool periodic = false;
  std::vector<Window> windows;
  int target_row(Window const &w, int r, int ny, KernelGeometry const &geom) const;
};
GridCover grid_windows(int ny, int offset, KernelGeometry const &geom);

/*
 * im2col: column (w * n_out + xo) holds the neighbourhood of window w at output column xo, feature
 * index (c * ky + j) * kx + t. Input column xo + t - pad, zero outside [0, nx).
 * n_out = nx + 2 * pad - kx + 1.
 */
Eigen::MatrixXcd gather_patches(MultiCoilKspace const &ksp, std::vector<Window> const &windows, int kx, int pad);

} // namespace pmri
