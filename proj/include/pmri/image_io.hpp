#pragma once

#include <filesystem>

#include "types.hpp"

namespace pmri {

// 8-bit binary graymap (P5), linearly scaled so the image maximum maps to 255.
void save_pgm(RealImage const &img, std::filesystem::path const &path);

/*
 * Grayscale portable float map: "Pf\n<nx> <ny>\n-1.0\n" then little-endian f32 samples, bottom row
 * first as the format prescribes.
 */
void save_pfm(RealImage const &img, std::filesystem::path const &path);
RealImage load_pfm(std::filesystem::path const &path);

} // namespace pmri
