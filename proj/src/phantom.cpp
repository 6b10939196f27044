#include "pmri/phantom.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>
#include <fmt/format.h>

#include "pmri/core.hpp"
#include "pmri/rng.hpp"

namespace pmri {

double PhaseMap::operator()(double u, double v) const
{
  auto const &c = coeffs;
  return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
}

std::vector<Ellipse> shepp_logan()
{
  return {
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},
    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
    {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
}

ComplexImage render_phantom(PhantomSpec const &spec)
{
  if (spec.ny < 1 || spec.nx < 1) {
    throw DimensionError(fmt::format("phantom extents must be >= 1, got {}x{}", spec.ny, spec.nx));
  }
  if (!(spec.noise_sigma >= 0.0)) {
    throw InvalidArgument("noise sigma must be >= 0");
  }
  ComplexImage img = ComplexImage::Zero(spec.ny, spec.nx);
  for (auto const &e : spec.ellipses) {
    if (!std::isfinite(e.intensity)) {
      throw InvalidArgument("ellipse intensity must be finite");
    }
    double const th = e.angle_deg * std::numbers::pi / 180.0;
    double const ct = std::cos(th), st = std::sin(th);
    for (int y = 0; y < spec.ny; y++) {
      double const v = 1.0 - 2.0 * (y + 0.5) / spec.ny;
      for (int x = 0; x < spec.nx; x++) {
        double const u = 2.0 * (x + 0.5) / spec.nx - 1.0;
        double const du = u - e.cx, dv = v - e.cy;
        double const pu = (du * ct + dv * st) / e.rx;
        double const pv = (-du * st + dv * ct) / e.ry;
        if (pu * pu + pv * pv <= 1.0) {
          img(y, x) += e.intensity;
        }
      }
    }
  }
  if (spec.image_phase) {
    for (int y = 0; y < spec.ny; y++) {
      double const v = 1.0 - 2.0 * (y + 0.5) / spec.ny;
      for (int x = 0; x < spec.nx; x++) {
        double const u = 2.0 * (x + 0.5) / spec.nx - 1.0;
        img(y, x) *= std::polar(1.0, (*spec.image_phase)(u, v));
      }
    }
  }
  return img;
}

void CoilModel::validate() const
{
  if (coils.empty()) {
    throw InvalidArgument("coil model has no coils");
  }
  bool any_dc = false;
  for (std::size_t h = 0; h < coils.size(); h++) {
    if (coils[h].empty()) {
      throw InvalidArgument(fmt::format("coil {} has no harmonic terms", h));
    }
    for (auto const &t : coils[h]) {
      if (!std::isfinite(t.a.real()) || !std::isfinite(t.a.imag())) {
        throw InvalidArgument(fmt::format("coil {} has a non-finite amplitude", h));
      }
      any_dc = any_dc || (t.m == 0 && t.n == 0);
    }
  }
  if (!any_dc) {
    throw InvalidArgument("coil model needs at least one DC term");
  }
}

ComplexImage CoilModel::sensitivity(int coil, int ny, int nx) const
{
  ComplexImage s = ComplexImage::Zero(ny, nx);
  for (auto const &t : coils.at(std::size_t(coil))) {
    for (int y = 0; y < ny; y++) {
      for (int x = 0; x < nx; x++) {
        // Reduce the phase argument modulo 1 so large orders stay accurate.
        long long const py = (long long)(t.m) * (y - ny / 2), px = (long long)(t.n) * (x - nx / 2);
        double const f = double(py % ny) / ny + double(px % nx) / nx;
        s(y, x) += t.a * std::polar(1.0, 2.0 * std::numbers::pi * f);
      }
    }
  }
  return s;
}

MultiCoilKspace simulate_kspace(ComplexImage const &image, CoilModel const &coils, double noise_sigma,
                                std::uint64_t seed)
{
  coils.validate();
  if (!(noise_sigma >= 0.0)) {
    throw InvalidArgument("noise sigma must be >= 0");
  }
  int const ny = int(image.rows()), nx = int(image.cols());
  ImageStack stack(coils.n_coils(), ny, nx);
  for (int c = 0; c < coils.n_coils(); c++) {
    ComplexImage const s = coils.sensitivity(c, ny, nx);
    for (int y = 0; y < ny; y++) {
      for (int x = 0; x < nx; x++) {
        stack(c, y, x) = s(y, x) * image(y, x);
      }
    }
  }
  MultiCoilKspace ksp = fft2c(stack);
  if (noise_sigma > 0.0) {
    Rng rng(seed);
    for (auto &v : ksp.data()) {
      double const g1 = rng.normal();
      double const g2 = rng.normal();
      v += noise_sigma * Cx{g1, g2};
    }
  }
  return ksp;
}

CoilModel make_harmonic_array(int n_coils, int max_pe_harmonic, std::uint64_t seed)
{
  if (n_coils < 1 || max_pe_harmonic < 0 || max_pe_harmonic > n_coils - 1) {
    throw InvalidArgument(
      fmt::format("need 0 <= max_pe_harmonic <= n_coils - 1, got {} harmonics for {} coils", max_pe_harmonic, n_coils));
  }
  Rng rng(seed);
  int const np = max_pe_harmonic + 1;
  for (;;) {
    Eigen::MatrixXcd amp(n_coils, np);
    for (int h = 0; h < n_coils; h++) {
      for (int p = 0; p < np; p++) {
        double const re = rng.normal();
        double const im = rng.normal();
        amp(h, p) = Cx{re, im} / std::numbers::sqrt2;
      }
    }
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>(amp).rank() < np) {
      continue;
    }
    CoilModel model;
    model.coils.resize(std::size_t(n_coils));
    for (int h = 0; h < n_coils; h++) {
      for (int p = 0; p < np; p++) {
        model.coils[std::size_t(h)].push_back({p, 0, amp(h, p)});
      }
    }
    return model;
  }
}

Eigen::MatrixXcd harmonic_amplitudes(CoilModel const &model)
{
  int np = 0;
  for (auto const &c : model.coils) {
    for (auto const &t : c) {
      np = std::max(np, t.m + 1);
    }
  }
  Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(model.n_coils(), np);
  for (int h = 0; h < model.n_coils(); h++) {
    for (auto const &t : model.coils[std::size_t(h)]) {
      if (t.n == 0 && t.m >= 0) {
        amp(h, t.m) += t.a;
      }
    }
  }
  return amp;
}

CoilModel make_ring_array(int n_coils, int max_harmonic, double width, double radius, std::uint64_t seed)
{
  if (n_coils < 1 || max_harmonic < 0 || !(width > 0.0)) {
    throw InvalidArgument("ring array needs n_coils >= 1, max_harmonic >= 0, width > 0");
  }
  Rng rng(seed);
  double const pi = std::numbers::pi;
  CoilModel model;
  model.coils.resize(std::size_t(n_coils));
  for (int h = 0; h < n_coils; h++) {
    double const theta = 2.0 * pi * h / n_coils;
    double const py = 0.5 * radius * std::sin(theta), px = 0.5 * radius * std::cos(theta);
    Cx const phase = std::polar(1.0, 2.0 * pi * rng.uniform());
    for (int m = -max_harmonic; m <= max_harmonic; m++) {
      for (int n = -max_harmonic; n <= max_harmonic; n++) {
        // Fourier-series coefficients of a periodic Gaussian bump centered at (py, px), FOV = 1.
        double const mag = std::exp(-2.0 * pi * pi * width * width * (m * m + n * n));
        Cx const shift = std::polar(1.0, -2.0 * pi * (m * py + n * px));
        model.coils[std::size_t(h)].push_back({m, n, phase * mag * shift});
      }
    }
  }
  return model;
}

MultiCoilKspace simulate(PhantomSpec const &spec, CoilModel const &coils)
{
  return simulate_kspace(render_phantom(spec), coils, spec.noise_sigma, spec.seed);
}

} // namespace pmri
