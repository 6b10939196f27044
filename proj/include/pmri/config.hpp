#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "phantom.hpp"
#include "recon.hpp"

namespace pmri {

/*
 * Declarative run description. Every field has a default; from_json rejects unknown keys at every
 * level. One seed drives coil amplitudes, acquisition noise and network initialisation.
 *
 *   seed
 *   phantom   { ny, nx, noise_sigma, image_phase: null | [6 coefficients],
 *               ellipses: "shepp_logan" | [[cx, cy, rx, ry, angle_deg, intensity], ...] }
 *   coils     { model: "harmonic" | "ring", n_coils, max_harmonic, width, radius }
 *   pattern   { rate, acs, offset }
 *   method    "grappa" | "igrappa" | "raki" | "iraki"
 *   vcc       bool
 *   calibration { mode: "inline" | "prescan", prescan_lines }
 *   grappa    { ky, kx, lambda }
 *   raki      { ky, kx, channels1, channels2, kx3, leaky_slope, eta, steps }
 *   iraki     { eta0, delta_eta: null | x, n_iter: null | n, augmented_lines, steps_per_iter, ky, kx }
 *   metrics   { mask_threshold }
 */
struct RunConfig
{
  std::uint64_t seed = 1;

  int ny = 128;
  int nx = 128;
  double noise_sigma = 0.0;
  std::optional<PhaseMap> image_phase;
  std::vector<Ellipse> ellipses = shepp_logan();
  bool shepp_logan_ellipses = true;

  std::string coil_model = "harmonic";
  int n_coils = 8;
  int max_harmonic = 3;
  double coil_width = 0.35;
  double coil_radius = 0.7;

  int rate = 4;
  int acs = 18;
  int offset = 0;

  Method method = Method::grappa;
  bool vcc = false;

  std::string calibration = "inline";
  int prescan_lines = 24;

  int grappa_ky = 2;
  int grappa_kx = 5;
  double lambda = 0.0;

  int raki_ky = 2;
  int raki_kx = 5;
  int channels1 = 256;
  int channels2 = 128;
  int kx3 = 5;
  double leaky_slope = 0.01;
  double raki_eta = 5e-3;
  int raki_steps = 250;

  double eta0 = 5e-3;
  std::optional<double> delta_eta; // default follows the rate
  std::optional<int> n_iter;       // default follows eta0 / delta_eta
  int augmented_lines = 65;
  int steps_per_iter = 250;
  int iraki_ky = 4;
  int iraki_kx = 7;

  double mask_threshold = 0.05;

  static RunConfig from_json(nlohmann::json const &j);
  static RunConfig load(std::string const &path);
  nlohmann::json to_json() const;

  // InvalidArgument naming the offending field.
  void validate() const;

  PhantomSpec phantom() const;
  CoilModel coils() const;
  SamplingPattern pattern() const;
  IrakiSchedule schedule() const;
  MethodOptions method_options() const;
};

} // namespace pmri
