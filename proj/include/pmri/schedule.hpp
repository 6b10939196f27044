#pragma once

#include <vector>

#include "windows.hpp"

namespace pmri {

/*
 * Iterative-training schedule: stage j trains at eta0 - j * delta_eta for j = 0..n_iter-1.
 * n_iter = floor(eta0 / delta_eta), minus one if that would make the last rate non-positive.
 */
struct IrakiSchedule
{
  double eta0 = 5e-3;
  double delta_eta = 2e-4;
  int n_iter = 25;
  int augmented_lines = 65;
  KernelGeometry grappa_geom{2, 5, 4};
  int raki_ky = 4;
  int raki_kx = 7;

  double rate_at(int j) const { return eta0 - j * delta_eta; }
  std::vector<double> rates() const;
  void validate() const;
};

// Iteration count implied by eta0 / delta_eta with every stage rate strictly positive.
int iteration_count(double eta0, double delta_eta);

IrakiSchedule build_schedule(int rate);

} // namespace pmri
