#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "types.hpp"

namespace pmri {

/*
 * KSP1 container, little-endian:
 *   "KSP1" | u32 coils | u32 ny | u32 nx | coils*ny*nx x (f32 real, f32 imag)
 * Samples are coil-major, then row (y), then readout (x). No padding.
 * Samples are narrowed to single precision on write.
 */
std::vector<char> encode_ksp(MultiCoilKspace const &ksp);
MultiCoilKspace decode_ksp(std::vector<char> const &bytes);

void save_ksp(MultiCoilKspace const &ksp, std::filesystem::path const &path);
MultiCoilKspace load_ksp(std::filesystem::path const &path);

// Round-trips a tensor through single precision, matching what save/load would produce.
MultiCoilKspace quantize_f32(MultiCoilKspace const &ksp);

std::vector<char> read_file(std::filesystem::path const &path);
void write_file(std::filesystem::path const &path, std::vector<char> const &bytes);

} // namespace pmri
