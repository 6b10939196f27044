#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "problem.hpp"
#include "raki.hpp"
#include "schedule.hpp"

namespace pmri {

struct IrakiOptions
{
  IrakiSchedule schedule;
  NetworkConfig net;        // layer-1 size comes from schedule.raki_ky / raki_kx
  int steps_per_iter = 250;
  std::uint64_t seed = 1;
  double grappa_lambda = 0.0;
};

// Network trained by iRAKI for a given coil count and rate (layer 1 from the schedule).
NetworkConfig iraki_network(IrakiOptions const &opts, int n_coils, int rate);

// Called after every training stage with the stage index, its learning rate and the trained weights.
using StageObserver = std::function<void(int stage, double eta, RakiWeights const &weights)>;

struct IrakiResult
{
  MultiCoilKspace ksp;
  MultiCoilKspace initial_grappa; // GRAPPA reconstruction that seeded the augmented ACS
  RakiWeights weights;
  std::vector<double> etas;
  std::vector<TrainReport> stages;
};

/*
 * 1. GRAPPA (schedule.grappa_geom) calibrated on problem.calib, measured lines restored.
 * 2. Central schedule.augmented_lines lines train the network (layer 1 raki_ky x raki_kx) from a seeded
 *    init at eta_0.
 * 3. Stages j = 1..n_iter-1: interpolate with the current weights, restore measured lines, retrain the
 *    same weights on the new central block at eta_j with fresh Adam moments.
 * 4. Final interpolation; measured lines restored when problem.reinsert.
 * With n_iter = 0 the result is the GRAPPA reconstruction.
 */
IrakiResult iraki_reconstruct(ReconProblem const &problem, IrakiOptions const &opts,
                              StageObserver const &observer = {});

IrakiResult iraki_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, IrakiOptions const &opts);

// Calibration on a separately acquired fully sampled scan; iterations refine on the image scan.
IrakiResult iraki_reconstruct_prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                      MultiCoilKspace const &prescan_ksp, IrakiOptions const &opts);

} // namespace pmri
