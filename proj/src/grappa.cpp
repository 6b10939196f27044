#include "pmri/grappa.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <fmt/format.h>

#include "pmri/core.hpp"

namespace pmri {

Cx GrappaKernel::weight(int r, int c_out, int c_src, int j, int t) const
{
  auto const &g = geometry;
  return weights((r - 1) * n_coils + c_out, (c_src * g.ky + j) * g.kx + t);
}

bool GrappaKernel::finite() const { return weights.allFinite(); }

CalibrationSystem assemble_calibration(MultiCoilKspace const &acs, KernelGeometry const &geom)
{
  geom.validate();
  auto const windows = calibration_windows(acs.ny(), geom);
  int const n_out = acs.nx() - geom.kx + 1;
  if (windows.empty()) {
    throw InsufficientAcs(fmt::format("GRAPPA calibration with a {}x{} kernel at R={}", geom.ky, geom.kx, geom.rate),
                          geom.source_span());
  }
  if (n_out < 1) {
    throw InsufficientAcs(fmt::format("ACS readout width {} narrower than kernel width {}", acs.nx(), geom.kx),
                          geom.source_span());
  }
  int const nc = acs.coils(), R = geom.rate, g = geom.target_gap(), half = (geom.kx - 1) / 2;
  CalibrationSystem sys;
  sys.n_coils = nc;
  sys.A = gather_patches(acs, windows, geom.kx, 0).transpose();
  sys.B.resize(sys.A.rows(), Eigen::Index(R - 1) * nc);
  for (std::size_t w = 0; w < windows.size(); w++) {
    for (int r = 1; r < R; r++) {
      int const y = windows[w].anchor + g * R + r;
      for (int c = 0; c < nc; c++) {
        for (int xo = 0; xo < n_out; xo++) {
          sys.B(Eigen::Index(w) * n_out + xo, (r - 1) * nc + c) = acs(c, y, xo + half);
        }
      }
    }
  }
  return sys;
}

Eigen::MatrixXcd solve_least_squares(Eigen::MatrixXcd const &A, Eigen::MatrixXcd const &B, double lambda)
{
  if (!(lambda >= 0.0)) {
    throw InvalidArgument("Tikhonov lambda must be >= 0");
  }
  if (A.rows() < 1 || A.rows() != B.rows()) {
    throw DimensionError(fmt::format("least squares: A is {}x{}, B is {}x{}", A.rows(), A.cols(), B.rows(), B.cols()));
  }
  if (!A.allFinite() || !B.allFinite()) {
    throw SolverError("calibration data contains non-finite values");
  }
  Eigen::MatrixXcd X;
  if (lambda > 0.0) {
    Eigen::MatrixXcd Aa(A.rows() + A.cols(), A.cols());
    Aa << A, Eigen::MatrixXcd::Identity(A.cols(), A.cols()) * std::sqrt(lambda);
    Eigen::MatrixXcd Ba = Eigen::MatrixXcd::Zero(B.rows() + A.cols(), B.cols());
    Ba.topRows(B.rows()) = B;
    X = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(Aa).solve(Ba);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
    if (cod.rank() == 0 && B.norm() > 0.0) {
      throw SolverError("calibration matrix is numerically zero; use lambda > 0 or more ACS lines");
    }
    X = cod.solve(B);
  }
  if (!X.allFinite()) {
    throw SolverError("least-squares solve produced non-finite weights; try lambda > 0");
  }
  return X;
}

GrappaKernel calibrate(CalibrationSystem const &sys, KernelGeometry const &geom, double tikhonov_lambda)
{
  geom.validate();
  if (sys.A.cols() != geom.n_features(sys.n_coils) || sys.B.cols() != Eigen::Index(geom.rate - 1) * sys.n_coils) {
    throw DimensionError("calibration system does not match kernel geometry");
  }
  GrappaKernel k;
  k.geometry = geom;
  k.n_coils = sys.n_coils;
  k.weights = solve_least_squares(sys.A, sys.B, tikhonov_lambda).transpose();
  return k;
}

MultiCoilKspace interpolate_offgrid(MultiCoilKspace const &ksp_zf, GrappaKernel const &kernel, int offset)
{
  auto const &geom = kernel.geometry;
  if (ksp_zf.coils() != kernel.n_coils) {
    throw DimensionError(fmt::format("kernel calibrated for {} coils, data has {}", kernel.n_coils, ksp_zf.coils()));
  }
  MultiCoilKspace out = ksp_zf;
  int const R = geom.rate, nc = ksp_zf.coils(), nx = ksp_zf.nx(), ny = ksp_zf.ny();
  if (R == 1) {
    return out;
  }
  auto const cover = grid_windows(ny, offset, geom);
  Eigen::MatrixXcd const P = gather_patches(ksp_zf, cover.windows, geom.kx, (geom.kx - 1) / 2);
  Eigen::MatrixXcd const Y = kernel.weights * P;
  for (std::size_t w = 0; w < cover.windows.size(); w++) {
    for (int r = 1; r < R; r++) {
      int const y = cover.target_row(cover.windows[w], r, ny, geom);
      if (y < 0) {
        continue;
      }
      for (int c = 0; c < nc; c++) {
        auto dst = out.row(c, y);
        for (int x = 0; x < nx; x++) {
          dst[std::size_t(x)] = Y((r - 1) * nc + c, Eigen::Index(w) * nx + x);
        }
      }
    }
  }
  return out;
}

MultiCoilKspace interpolate(MultiCoilKspace const &ksp_zf, GrappaKernel const &kernel, SamplingPattern const &pattern)
{
  if (pattern.rate != kernel.geometry.rate) {
    throw InvalidArgument(
      fmt::format("kernel rate {} does not match sampling rate {}", kernel.geometry.rate, pattern.rate));
  }
  return reinsert_lines(interpolate_offgrid(ksp_zf, kernel, pattern.offset), ksp_zf, pattern);
}

namespace {

KernelGeometry at_rate(KernelGeometry geom, int rate)
{
  geom.rate = rate;
  geom.validate();
  return geom;
}

MultiCoilKspace calibrate_and_fill(MultiCoilKspace const &calib, ReconProblem const &problem,
                                   KernelGeometry const &geom, double lambda)
{
  auto const kernel = calibrate(assemble_calibration(calib, geom), geom, lambda);
  return interpolate_offgrid(problem.data, kernel, problem.offset);
}

} // namespace

MultiCoilKspace grappa_reconstruct(ReconProblem const &problem, KernelGeometry const &geom, double lambda)
{
  if (problem.rate == 1) {
    return problem.data;
  }
  auto const g = at_rate(geom, problem.rate);
  auto out = calibrate_and_fill(problem.calib, problem, g, lambda);
  return problem.reinsert ? reinsert_lines(out, problem.data, problem.acquired) : out;
}

MultiCoilKspace grappa_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                   KernelGeometry const &geom, double lambda, bool reinsert)
{
  return grappa_reconstruct(ReconProblem::inline_acs(ksp_us, pattern, reinsert), geom, lambda);
}

MultiCoilKspace igrappa_reconstruct(ReconProblem const &problem, KernelGeometry const &geom,
                                    IrakiSchedule const &schedule, double lambda)
{
  if (problem.rate == 1) {
    return problem.data;
  }
  auto const g = at_rate(geom, problem.rate);
  auto recon = calibrate_and_fill(problem.calib, problem, g, lambda);
  int const lines = std::min(schedule.augmented_lines, problem.data.ny());
  for (int it = 0; it < schedule.n_iter; it++) {
    auto const block = extract_central_lines(reinsert_lines(recon, problem.data, problem.acquired), lines);
    recon = calibrate_and_fill(block, problem, g, lambda);
  }
  return problem.reinsert ? reinsert_lines(recon, problem.data, problem.acquired) : recon;
}

MultiCoilKspace igrappa_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                    KernelGeometry const &geom, IrakiSchedule const &schedule, double lambda)
{
  return igrappa_reconstruct(ReconProblem::inline_acs(ksp_us, pattern), geom, schedule, lambda);
}

} // namespace pmri
