#pragma once

#include "types.hpp"

namespace pmri {

/*
 * Everything a k-space interpolator needs: zero-filled data on a uniform grid, which lines were
 * measured (per coil), a fully sampled calibration block and whether measured lines are restored
 * in the output. Virtual-conjugate-coil stacks build this directly; the pattern-based helpers
 * below cover ordinary acquisitions.
 */
struct ReconProblem
{
  MultiCoilKspace data;
  int rate = 1;
  int offset = 0;
  LineMask acquired;
  MultiCoilKspace calib;
  bool reinsert = true;

  // Calibration on the ACS block embedded in ksp_us. Zero-fills ksp_us per pattern.
  static ReconProblem inline_acs(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, bool reinsert = true);

  // Calibration on a separately acquired fully sampled scan; only the image scan's own lines are restored.
  static ReconProblem prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                              MultiCoilKspace const &prescan_ksp);
};

} // namespace pmri
