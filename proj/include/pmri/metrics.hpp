#pragma once

#include <string>

#include "types.hpp"

namespace pmri {

struct MetricReport
{
  double nmse = 0.0;
  double psnr = 0.0; // dB; +inf when the reconstruction is exact on the mask
  double ssim = 0.0;
  double mask_fraction = 0.0;

  // One "key value" pair per line, values printed with 17 significant digits.
  std::string serialize() const;
  static MetricReport parse(std::string const &text);
  bool operator==(MetricReport const &) const = default;
};

struct SsimParams
{
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// reference(y, x) > threshold_fraction * max(reference)
BoolImage make_mask(RealImage const &reference, double threshold_fraction = 0.05);

// sum_mask (recon - ref)^2 / sum_mask ref^2
double nmse(RealImage const &recon, RealImage const &reference, BoolImage const &mask);

// 20 log10(max_mask ref / RMSE_mask)
double psnr(RealImage const &recon, RealImage const &reference, BoolImage const &mask);

/*
 * Mean over mask pixels of the SSIM map, Gaussian-weighted local statistics with symmetric
 * (half-sample mirror) boundary extension. Dynamic range L = max(reference).
 */
double ssim(RealImage const &recon, RealImage const &reference, BoolImage const &mask, SsimParams const &p = {});

// Full SSIM map (no masking).
RealImage ssim_map(RealImage const &recon, RealImage const &reference, SsimParams const &p = {});

MetricReport evaluate(RealImage const &recon, RealImage const &reference, double threshold_fraction = 0.05);

} // namespace pmri
