#pragma once

#include "types.hpp"

namespace pmri {

// Start row of a centered block of `count` rows in an extent of `n`: ceil((n - count) / 2).
int central_start(int n, int count);

// Copies acquired lines, zeroes everything else.
MultiCoilKspace zero_fill(MultiCoilKspace const &ksp, SamplingPattern const &pattern);
MultiCoilKspace zero_fill(MultiCoilKspace const &ksp, LineMask const &mask);

// (coils x count x nx) block starting at central_start(ny, count).
MultiCoilKspace extract_central_lines(MultiCoilKspace const &ksp, int count);

// Rows [start, start + count) of every coil.
MultiCoilKspace extract_rows(MultiCoilKspace const &ksp, int start, int count);

// Restores every acquired line of `original` into `recon`.
MultiCoilKspace reinsert_lines(MultiCoilKspace const &recon, MultiCoilKspace const &original,
                               SamplingPattern const &pattern);
MultiCoilKspace reinsert_lines(MultiCoilKspace const &recon, MultiCoilKspace const &original,
                               LineMask const &mask);

/*
 * Centered, orthonormal 2-D DFT pair applied per coil. Index ny/2 (integer division) holds DC in both
 * domains. fft2c returns an exactly Hermitian spectrum for coils whose input is purely real.
 */
ImageStack ifft2c(MultiCoilKspace const &ksp);
MultiCoilKspace fft2c(ImageStack const &img);

// sqrt(sum_{c < n_keep} |img_c|^2)
RealImage rss_combine(ImageStack const &img, int n_keep);
RealImage rss_combine(ImageStack const &img);

// Bitwise equality of sample payloads (distinguishes -0.0 and NaN payloads, unlike operator==).
template <typename Tag>
bool bit_equal(CoilArray<Tag> const &a, CoilArray<Tag> const &b);

// True when every sample in every acquired line is bitwise equal between a and b.
bool acquired_lines_equal(MultiCoilKspace const &a, MultiCoilKspace const &b, LineMask const &mask);

bool all_finite(MultiCoilKspace const &ksp);

double max_abs(MultiCoilKspace const &ksp);

} // namespace pmri
