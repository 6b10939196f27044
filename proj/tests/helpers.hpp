#pragma once

#include <cmath>

#include "pmri/core.hpp"
#include "pmri/phantom.hpp"
#include "pmri/rng.hpp"

namespace testing {

using namespace pmri;

inline ComplexImage shepp(int ny, int nx, bool with_phase = false)
{
  PhantomSpec s;
  s.ny = ny;
  s.nx = nx;
  s.ellipses = shepp_logan();
  if (with_phase) {
    s.image_phase = PhaseMap{{0.4, 0.8, -0.6, 0.3, 0.2, -0.1}};
  }
  return render_phantom(s);
}

// Noiseless phantom k-space seen by harmonic coils with phase-encode orders 0..max_harmonic.
inline MultiCoilKspace harmonic_kspace(int coils, int max_harmonic, int ny, int nx, std::uint64_t seed = 3,
                                       bool with_phase = false)
{
  return simulate_kspace(shepp(ny, nx, with_phase), make_harmonic_array(coils, max_harmonic, seed), 0.0, 0);
}

inline MultiCoilKspace random_ksp(int coils, int ny, int nx, std::uint64_t seed)
{
  Rng rng(seed);
  MultiCoilKspace k(coils, ny, nx);
  for (auto &v : k.data()) {
    v = {rng.normal(), rng.normal()};
  }
  return k;
}

// sum |a - b|^2 / sum |b|^2 over every sample
inline double ksp_nmse(MultiCoilKspace const &a, MultiCoilKspace const &b)
{
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); i++) {
    num += std::norm(a.data()[i] - b.data()[i]);
    den += std::norm(b.data()[i]);
  }
  return num / den;
}

inline double image_nmse(RealImage const &a, RealImage const &b) { return (a - b).square().sum() / b.square().sum(); }

inline RealImage random_image(int ny, int nx, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
  Rng rng(seed);
  RealImage img(ny, nx);
  for (Eigen::Index i = 0; i < img.size(); i++) {
    img.data()[i] = rng.uniform(lo, hi);
  }
  return img;
}

// Direct windowed statistics with two-pass (centred) moments and explicit mirror indexing.
inline double brute_force_ssim(RealImage const &a, RealImage const &b, BoolImage const &mask)
{
  int const ny = int(a.rows()), nx = int(a.cols()), r = 5;
  double w[11][11];
  double total = 0.0;
  for (int i = -r; i <= r; i++) {
    for (int j = -r; j <= r; j++) {
      w[i + r][j + r] = std::exp(-(i * i + j * j) / (2 * 1.5 * 1.5));
      total += w[i + r][j + r];
    }
  }
  auto refl = [](int i, int n) { return i < 0 ? -i - 1 : (i >= n ? 2 * n - i - 1 : i); };
  double const L = b.maxCoeff(), c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y < ny; y++) {
    for (int x = 0; x < nx; x++) {
      if (!mask(y, x)) {
        continue;
      }
      double ma = 0, mb = 0;
      for (int i = -r; i <= r; i++) {
        for (int j = -r; j <= r; j++) {
          double const wt = w[i + r][j + r] / total;
          ma += wt * a(refl(y + i, ny), refl(x + j, nx));
          mb += wt * b(refl(y + i, ny), refl(x + j, nx));
        }
      }
      double va = 0, vb = 0, cab = 0;
      for (int i = -r; i <= r; i++) {
        for (int j = -r; j <= r; j++) {
          double const wt = w[i + r][j + r] / total;
          double const da = a(refl(y + i, ny), refl(x + j, nx)) - ma;
          double const db = b(refl(y + i, ny), refl(x + j, nx)) - mb;
          va += wt * da * da;
          vb += wt * db * db;
          cab += wt * da * db;
        }
      }
      sum += ((2 * ma * mb + c1) * (2 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      count++;
    }
  }
  return sum / count;
}

} // namespace testing
