#include "pmri/problem.hpp"

#include <fmt/format.h>

#include "pmri/core.hpp"

namespace pmri {

ReconProblem ReconProblem::inline_acs(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, bool reinsert)
{
  pattern.validate(ksp_us.ny());
  ReconProblem p;
  p.acquired = LineMask::from_pattern(pattern, ksp_us.coils(), ksp_us.ny());
  p.data = zero_fill(ksp_us, p.acquired);
  p.rate = pattern.rate;
  p.offset = pattern.offset;
  p.reinsert = reinsert;
  if (pattern.rate > 1) {
    if (pattern.acs_count < 1) {
      throw InsufficientAcs("inline calibration without ACS lines", 1);
    }
    p.calib = extract_rows(ksp_us, pattern.acs_start, pattern.acs_count);
  }
  return p;
}

ReconProblem ReconProblem::prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                   MultiCoilKspace const &prescan_ksp)
{
  pattern.validate(ksp_us.ny());
  if (prescan_ksp.coils() != ksp_us.coils()) {
    throw DimensionError(
      fmt::format("pre-scan has {} coils, image scan has {}", prescan_ksp.coils(), ksp_us.coils()));
  }
  ReconProblem p;
  p.acquired = LineMask::from_pattern(pattern, ksp_us.coils(), ksp_us.ny());
  p.data = zero_fill(ksp_us, p.acquired);
  p.rate = pattern.rate;
  p.offset = pattern.offset;
  p.reinsert = true;
  p.calib = prescan_ksp;
  return p;
}

} // namespace pmri
