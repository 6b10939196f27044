#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "types.hpp"

namespace pmri {

using ComplexImage = Eigen::Array<Cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/*
 * Ellipse in normalized field-of-view coordinates: u = 2(x + 0.5)/nx - 1 to the right,
 * v = 1 - 2(y + 0.5)/ny upwards. Rotation is counter-clockwise in degrees.
 */
struct Ellipse
{
  double cx = 0.0;
  double cy = 0.0;
  double rx = 1.0;
  double ry = 1.0;
  double angle_deg = 0.0;
  double intensity = 1.0;
};

// phi(u, v) = c0 + c1 u + c2 v + c3 u^2 + c4 u v + c5 v^2  (radians)
struct PhaseMap
{
  std::array<double, 6> coeffs{};
  double operator()(double u, double v) const;
};

struct PhantomSpec
{
  int ny = 128;
  int nx = 128;
  std::vector<Ellipse> ellipses;
  std::optional<PhaseMap> image_phase;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Modified (Toft) Shepp-Logan ellipse set.
std::vector<Ellipse> shepp_logan();

// Pixel value = sum of intensities of ellipses containing the pixel center, times e^{i phi} if a phase is set.
ComplexImage render_phantom(PhantomSpec const &spec);

struct Harmonic
{
  int m = 0; // phase-encode order
  int n = 0; // readout order
  Cx a{1.0, 0.0};
};

/*
 * Band-limited coil sensitivities
 *   c_h(y, x) = sum_k a_k exp(i 2 pi (m_k (y - ny/2) / ny + n_k (x - nx/2) / nx)).
 * Measured relative to the DC pixel, a harmonic (m, n) shifts the coil's k-space by exactly (m, n) bins.
 */
struct CoilModel
{
  std::vector<std::vector<Harmonic>> coils;

  int n_coils() const { return int(coils.size()); }
  void validate() const;
  ComplexImage sensitivity(int coil, int ny, int nx) const;
};

// k-space = fft2c(c_h * image) + sigma (g1 + i g2), g ~ N(0, 1) drawn from Rng(seed) in storage order.
MultiCoilKspace simulate_kspace(ComplexImage const &image, CoilModel const &coils, double noise_sigma,
                                std::uint64_t seed);

/*
 * Coils with harmonics (p, 0), p = 0..max_pe_harmonic, and seeded complex Gaussian amplitudes. The
 * n_coils x (max_pe_harmonic + 1) amplitude matrix is redrawn until it has full column rank.
 */
CoilModel make_harmonic_array(int n_coils, int max_pe_harmonic, std::uint64_t seed);

// Amplitude matrix (coil, harmonic order) of a model built by make_harmonic_array.
Eigen::MatrixXcd harmonic_amplitudes(CoilModel const &model);

/*
 * Localized surface-coil ring: coil h is a Gaussian bump of width `width` (fraction of the FOV) centered
 * on a ring of radius `radius`, with a seeded random phase, truncated to |m|, |n| <= max_harmonic.
 */
CoilModel make_ring_array(int n_coils, int max_harmonic, double width, double radius, std::uint64_t seed);

// Full noisy multi-coil acquisition of a phantom.
MultiCoilKspace simulate(PhantomSpec const &spec, CoilModel const &coils);

} // namespace pmri
