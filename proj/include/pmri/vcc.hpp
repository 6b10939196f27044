#pragma once

#include "problem.hpp"
#include "recon.hpp"
#include "types.hpp"

namespace pmri {

// Physical coils followed by their virtual conjugates: coil h + n_physical holds conj(s_h(-k)).
struct VccStack
{
  MultiCoilKspace data;
  int n_physical = 0;
};

// Storage row/column of -k: reflection about the DC bin n/2, modulo n.
inline int reflect_index(int i, int n) { return ((2 * (n / 2) - i) % n + n) % n; }

VccStack augment_vcc(MultiCoilKspace const &ksp);

// Physical rows of `mask` followed by the reflected rows for the virtual coils.
LineMask augment_mask(LineMask const &mask);

/*
 * The 2 N_c coil problem. Virtual coils of the undersampled data come from the zero-filled k-space, so
 * their acquired lines are the reflection of the physical ones. Inline calibration uses the ACS rows
 * whose reflection is also an ACS row; a pre-scan is augmented as a whole. Throws InvalidArgument when the grid is not
 * mapped onto itself by the reflection (any nonzero offset).
 */
ReconProblem vcc_problem(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, bool reinsert = true);
ReconProblem vcc_problem_prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                 MultiCoilKspace const &prescan_ksp);

struct VccResult
{
  RealImage image;          // RSS over the physical coils
  MultiCoilKspace physical; // reconstructed k-space of the physical coils
  ReconOutput output;       // full 2 N_c coil reconstruction and training history
};

VccResult vcc_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, Method method,
                          MethodOptions const &opts);
VccResult vcc_reconstruct(ReconProblem const &stacked, int n_physical, Method method, MethodOptions const &opts,
                          StageObserver const &observer = {});

} // namespace pmri
