#pragma once

#include "problem.hpp"
#include "schedule.hpp"
#include "types.hpp"
#include "windows.hpp"

namespace pmri {

/*
 * Linear k-space interpolation weights. Row (r - 1) * n_coils + c predicts coil c at target offset r;
 * column (c_src * ky + j) * kx + t multiplies source coil c_src, source line j, readout tap t.
 */
struct GrappaKernel
{
  KernelGeometry geometry;
  int n_coils = 0;
  Eigen::MatrixXcd weights;

  Cx weight(int r, int c_out, int c_src, int j, int t) const;
  bool finite() const;
};

// argmin_X |A X - B|^2 + lambda |X|^2 via complete orthogonal decomposition (minimum-norm when rank deficient).
Eigen::MatrixXcd solve_least_squares(Eigen::MatrixXcd const &A, Eigen::MatrixXcd const &B, double lambda);

// Least-squares system A W = B: one row per valid window, A = source neighbourhoods, B = targets.
struct CalibrationSystem
{
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;
  int n_coils = 0;
};

CalibrationSystem assemble_calibration(MultiCoilKspace const &acs, KernelGeometry const &geom);

/*
 * argmin_W |A W - B|^2 + lambda |W|^2. Solved with a rank-revealing complete orthogonal decomposition
 * of A (or of [A; sqrt(lambda) I]), which yields the minimum-norm solution for rank-deficient systems.
 */
GrappaKernel calibrate(CalibrationSystem const &sys, KernelGeometry const &geom, double tikhonov_lambda = 0.0);

// Fills the missing lines of a zero-filled k-space; measured lines are left untouched.
MultiCoilKspace interpolate(MultiCoilKspace const &ksp_zf, GrappaKernel const &kernel, SamplingPattern const &pattern);

// Predicts every off-grid line (measured ACS lines included) of problem.data.
MultiCoilKspace interpolate_offgrid(MultiCoilKspace const &ksp_zf, GrappaKernel const &kernel, int offset);

MultiCoilKspace grappa_reconstruct(ReconProblem const &problem, KernelGeometry const &geom, double lambda = 0.0);

// Inline calibration on the pattern's ACS block.
MultiCoilKspace grappa_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                   KernelGeometry const &geom, double lambda = 0.0, bool reinsert = true);

/*
 * Iterative GRAPPA: after the initial reconstruction, schedule.n_iter times recalibrate on the central
 * schedule.augmented_lines lines of the previous result (measured lines restored) and re-interpolate.
 */
MultiCoilKspace igrappa_reconstruct(ReconProblem const &problem, KernelGeometry const &geom,
                                    IrakiSchedule const &schedule, double lambda = 0.0);
MultiCoilKspace igrappa_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                    KernelGeometry const &geom, IrakiSchedule const &schedule, double lambda = 0.0);

} // namespace pmri
