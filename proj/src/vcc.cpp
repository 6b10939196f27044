#include "pmri/vcc.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pmri/core.hpp"

namespace pmri {

VccStack augment_vcc(MultiCoilKspace const &ksp)
{
  int const nc = ksp.coils(), ny = ksp.ny(), nx = ksp.nx();
  VccStack s{MultiCoilKspace(2 * nc, ny, nx), nc};
  for (int c = 0; c < nc; c++) {
    for (int y = 0; y < ny; y++) {
      int const ry = reflect_index(y, ny);
      for (int x = 0; x < nx; x++) {
        s.data(c, y, x) = ksp(c, y, x);
        s.data(c + nc, y, x) = std::conj(ksp(c, ry, reflect_index(x, nx)));
      }
    }
  }
  return s;
}

LineMask augment_mask(LineMask const &mask)
{
  int const nc = mask.coils(), ny = mask.ny();
  LineMask out(2 * nc, ny);
  for (int c = 0; c < nc; c++) {
    for (int y = 0; y < ny; y++) {
      out.set(c, y, mask(c, y));
      out.set(c + nc, y, mask(c, reflect_index(y, ny)));
    }
  }
  return out;
}

namespace {

void check_grid(SamplingPattern const &pattern, int ny)
{
  pattern.validate(ny);
  if (pattern.rate == 1) {
    return;
  }
  bool ok = pattern.offset == 0;
  for (int y = 0; ok && y < ny; y++) {
    ok = pattern.on_grid(y) == pattern.on_grid(reflect_index(y, ny));
  }
  if (!ok) {
    throw InvalidArgument(fmt::format(
      "virtual conjugate coils need a sampling grid that is symmetric about the DC row; offset {} at rate {} "
      "with {} lines is not",
      pattern.offset, pattern.rate, ny));
  }
}

ReconProblem stacked_data(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, bool reinsert)
{
  check_grid(pattern, ksp_us.ny());
  ReconProblem p;
  auto const mask = LineMask::from_pattern(pattern, ksp_us.coils(), ksp_us.ny());
  p.data = augment_vcc(zero_fill(ksp_us, mask)).data;
  p.acquired = augment_mask(mask);
  p.rate = pattern.rate;
  p.offset = pattern.offset;
  p.reinsert = reinsert;
  return p;
}

} // namespace

ReconProblem vcc_problem(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, bool reinsert)
{
  ReconProblem p = stacked_data(ksp_us, pattern, reinsert);
  if (pattern.rate == 1) {
    return p;
  }
  if (pattern.acs_count < 1) {
    throw InsufficientAcs("inline calibration without ACS lines", 1);
  }
  // ACS rows whose reflection is also an ACS row; the reflection stays clear of the wrap for a
  // block that contains the DC row
  int const ny = p.data.ny(), last = pattern.acs_start + pattern.acs_count - 1;
  int const lo = std::max(pattern.acs_start, 2 * (ny / 2) - last);
  int const hi = std::min(last, 2 * (ny / 2) - pattern.acs_start);
  if (hi < lo || hi >= ny || lo < 0) {
    throw InsufficientAcs("virtual-coil calibration: ACS block and its reflection do not overlap", 1);
  }
  p.calib = extract_rows(p.data, lo, hi - lo + 1);
  return p;
}

ReconProblem vcc_problem_prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                 MultiCoilKspace const &prescan_ksp)
{
  if (prescan_ksp.coils() != ksp_us.coils()) {
    throw DimensionError(
      fmt::format("pre-scan has {} coils, image scan has {}", prescan_ksp.coils(), ksp_us.coils()));
  }
  ReconProblem p = stacked_data(ksp_us, pattern, true);
  p.calib = augment_vcc(prescan_ksp).data;
  return p;
}

VccResult vcc_reconstruct(ReconProblem const &stacked, int n_physical, Method method, MethodOptions const &opts,
                          StageObserver const &observer)
{
  if (stacked.data.coils() != 2 * n_physical) {
    throw DimensionError(
      fmt::format("stack has {} coils, expected twice {} physical coils", stacked.data.coils(), n_physical));
  }
  VccResult r;
  r.output = run_method(stacked, method, opts, observer);
  auto const &k = r.output.ksp;
  r.physical = MultiCoilKspace(n_physical, k.ny(), k.nx());
  std::copy(k.data().begin(), k.data().begin() + std::ptrdiff_t(r.physical.size()), r.physical.data().begin());
  r.image = rss_combine(ifft2c(r.physical));
  return r;
}

VccResult vcc_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, Method method,
                          MethodOptions const &opts)
{
  return vcc_reconstruct(vcc_problem(ksp_us, pattern), ksp_us.coils(), method, opts);
}

} // namespace pmri
