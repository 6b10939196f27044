#include "pmri/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace pmri {

std::string MetricReport::serialize() const
{
  return fmt::format("nmse {:.17g}\npsnr {:.17g}\nssim {:.17g}\nmask_fraction {:.17g}\n", nmse, psnr, ssim,
                     mask_fraction);
}

MetricReport MetricReport::parse(std::string const &text)
{
  MetricReport r;
  bool seen[4] = {false, false, false, false};
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) {
      throw InvalidArgument(fmt::format("malformed metric line '{}'", line));
    }
    char *end = nullptr;
    double const v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      throw InvalidArgument(fmt::format("malformed metric value '{}'", value));
    }
    int idx = -1;
    if (key == "nmse") {
      r.nmse = v, idx = 0;
    } else if (key == "psnr") {
      r.psnr = v, idx = 1;
    } else if (key == "ssim") {
      r.ssim = v, idx = 2;
    } else if (key == "mask_fraction") {
      r.mask_fraction = v, idx = 3;
    } else {
      throw InvalidArgument(fmt::format("unknown metric key '{}'", key));
    }
    seen[idx] = true;
  }
  for (bool s : seen) {
    if (!s) {
      throw InvalidArgument("metric record is missing a key");
    }
  }
  return r;
}

namespace {

void check_shapes(RealImage const &a, RealImage const &b, BoolImage const &mask)
{
  if (a.rows() != b.rows() || a.cols() != b.cols() || mask.rows() != a.rows() || mask.cols() != a.cols()) {
    throw DimensionError(fmt::format("metric inputs differ in shape: {}x{}, {}x{}, mask {}x{}", a.rows(), a.cols(),
                                     b.rows(), b.cols(), mask.rows(), mask.cols()));
  }
  if (!mask.any()) {
    throw UndefinedMetric("evaluation mask is empty");
  }
}

} // namespace

BoolImage make_mask(RealImage const &reference, double threshold_fraction)
{
  if (!(threshold_fraction >= 0.0 && threshold_fraction < 1.0)) {
    throw InvalidArgument(fmt::format("mask threshold fraction must lie in [0, 1), got {}", threshold_fraction));
  }
  if (reference.size() == 0) {
    return BoolImage(reference.rows(), reference.cols());
  }
  return reference > threshold_fraction * reference.maxCoeff();
}

double nmse(RealImage const &recon, RealImage const &reference, BoolImage const &mask)
{
  check_shapes(recon, reference, mask);
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < recon.size(); i++) {
    if (mask.data()[i]) {
      double const d = recon.data()[i] - reference.data()[i];
      num += d * d;
      den += reference.data()[i] * reference.data()[i];
    }
  }
  if (!(den > 0.0)) {
    throw UndefinedMetric("reference has zero energy on the mask");
  }
  return num / den;
}

double psnr(RealImage const &recon, RealImage const &reference, BoolImage const &mask)
{
  check_shapes(recon, reference, mask);
  double sq = 0.0, peak = -std::numeric_limits<double>::infinity();
  long n = 0;
  for (Eigen::Index i = 0; i < recon.size(); i++) {
    if (mask.data()[i]) {
      double const d = recon.data()[i] - reference.data()[i];
      sq += d * d;
      peak = std::max(peak, reference.data()[i]);
      n++;
    }
  }
  if (!(peak > 0.0)) {
    throw UndefinedMetric("reference peak on the mask is not positive");
  }
  double const rmse = std::sqrt(sq / double(n));
  if (rmse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 20.0 * std::log10(peak / rmse);
}

namespace {

int mirror(int i, int n)
{
  while (i < 0 || i >= n) {
    i = i < 0 ? -i - 1 : 2 * n - i - 1;
  }
  return i;
}

RealImage gaussian_filter(RealImage const &img, std::vector<double> const &g)
{
  int const r = int(g.size()) / 2;
  int const ny = int(img.rows()), nx = int(img.cols());
  RealImage tmp(ny, nx), out(ny, nx);
  for (int y = 0; y < ny; y++) {
    for (int x = 0; x < nx; x++) {
      double s = 0.0;
      for (int k = -r; k <= r; k++) {
        s += g[std::size_t(k + r)] * img(y, mirror(x + k, nx));
      }
      tmp(y, x) = s;
    }
  }
  for (int y = 0; y < ny; y++) {
    for (int x = 0; x < nx; x++) {
      double s = 0.0;
      for (int k = -r; k <= r; k++) {
        s += g[std::size_t(k + r)] * tmp(mirror(y + k, ny), x);
      }
      out(y, x) = s;
    }
  }
  return out;
}

} // namespace

RealImage ssim_map(RealImage const &recon, RealImage const &reference, SsimParams const &p)
{
  if (recon.rows() != reference.rows() || recon.cols() != reference.cols()) {
    throw DimensionError("ssim: image shapes differ");
  }
  if (p.window < 1 || p.window % 2 == 0 || !(p.sigma > 0.0)) {
    throw InvalidArgument("ssim window must be odd with sigma > 0");
  }
  int const r = p.window / 2;
  if (recon.rows() < r || recon.cols() < r) {
    throw InvalidArgument(fmt::format("ssim: image {}x{} smaller than window radius {}", recon.rows(), recon.cols(), r));
  }
  double const L = reference.maxCoeff();
  if (!(L > 0.0)) {
    throw UndefinedMetric("ssim: reference dynamic range is zero");
  }
  std::vector<double> g(std::size_t(p.window));
  double sum = 0.0;
  for (int k = -r; k <= r; k++) {
    g[std::size_t(k + r)] = std::exp(-double(k * k) / (2.0 * p.sigma * p.sigma));
    sum += g[std::size_t(k + r)];
  }
  for (auto &v : g) {
    v /= sum;
  }
  RealImage const mx = gaussian_filter(recon, g), my = gaussian_filter(reference, g);
  RealImage const xx = gaussian_filter(recon * recon, g), yy = gaussian_filter(reference * reference, g);
  RealImage const xy = gaussian_filter(recon * reference, g);
  double const c1 = (p.k1 * L) * (p.k1 * L), c2 = (p.k2 * L) * (p.k2 * L);
  RealImage out(recon.rows(), recon.cols());
  for (Eigen::Index i = 0; i < out.size(); i++) {
    double const ux = mx.data()[i], uy = my.data()[i];
    double const vx = xx.data()[i] - ux * ux, vy = yy.data()[i] - uy * uy, cxy = xy.data()[i] - ux * uy;
    out.data()[i] = ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return out;
}

double ssim(RealImage const &recon, RealImage const &reference, BoolImage const &mask, SsimParams const &p)
{
  check_shapes(recon, reference, mask);
  RealImage const map = ssim_map(recon, reference, p);
  double s = 0.0;
  long n = 0;
  for (Eigen::Index i = 0; i < map.size(); i++) {
    if (mask.data()[i]) {
      s += map.data()[i];
      n++;
    }
  }
  return s / double(n);
}

MetricReport evaluate(RealImage const &recon, RealImage const &reference, double threshold_fraction)
{
  BoolImage const mask = make_mask(reference, threshold_fraction);
  MetricReport r;
  r.mask_fraction = mask.size() ? double(mask.count()) / double(mask.size()) : 0.0;
  if (!mask.any()) {
    throw UndefinedMetric("evaluation mask is empty (reference is all zero)");
  }
  r.nmse = nmse(recon, reference, mask);
  r.psnr = psnr(recon, reference, mask);
  r.ssim = ssim(recon, reference, mask);
  return r;
}

} // namespace pmri
