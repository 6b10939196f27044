#include "pmri/iraki.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pmri/core.hpp"
#include "pmri/grappa.hpp"

namespace pmri {

int iteration_count(double eta0, double delta_eta)
{
  if (!(eta0 > 0.0) || !(delta_eta > 0.0)) {
    throw InvalidArgument("learning-rate schedule needs eta0 > 0 and delta_eta > 0");
  }
  double const q = eta0 / delta_eta;
  double const nearest = std::round(q);
  long n = std::abs(q - nearest) <= 1e-9 * std::max(1.0, q) ? long(nearest) : long(std::floor(q));
  while (n > 0 && !(eta0 - double(n - 1) * delta_eta > 0.0)) {
    n--;
  }
  return int(n);
}

std::vector<double> IrakiSchedule::rates() const
{
  std::vector<double> out;
  for (int j = 0; j < n_iter; j++) {
    out.push_back(rate_at(j));
  }
  return out;
}

void IrakiSchedule::validate() const
{
  if (!(eta0 > 0.0) || !(delta_eta > 0.0)) {
    throw InvalidArgument("schedule needs eta0 > 0 and delta_eta > 0");
  }
  if (n_iter < 0) {
    throw InvalidArgument("schedule iteration count must be >= 0");
  }
  if (n_iter > 0 && !(rate_at(n_iter - 1) > 0.0)) {
    throw InvalidArgument(fmt::format("learning rate of stage {} is not positive", n_iter - 1));
  }
  if (augmented_lines < 1) {
    throw InvalidArgument("augmented ACS line count must be >= 1");
  }
  grappa_geom.validate();
  KernelGeometry{raki_ky, raki_kx, grappa_geom.rate}.validate();
}

IrakiSchedule build_schedule(int rate)
{
  if (rate < 2 || rate > 8) {
    throw InvalidArgument(fmt::format("iterative schedule supports R in [2, 8], got {}", rate));
  }
  IrakiSchedule s;
  s.eta0 = 5e-3;
  s.delta_eta = rate == 5 ? 3e-4 : 2e-4;
  s.n_iter = iteration_count(s.eta0, s.delta_eta);
  s.augmented_lines = 65;
  s.grappa_geom = KernelGeometry{2, 5, rate};
  s.raki_ky = 4;
  s.raki_kx = 7;
  return s;
}

NetworkConfig iraki_network(IrakiOptions const &opts, int n_coils, int rate)
{
  NetworkConfig cfg = opts.net;
  cfg.n_coils = n_coils;
  cfg.rate = rate;
  cfg.ky1 = opts.schedule.raki_ky;
  cfg.kx1 = opts.schedule.raki_kx;
  cfg.validate();
  return cfg;
}

IrakiResult iraki_reconstruct(ReconProblem const &problem, IrakiOptions const &opts, StageObserver const &observer)
{
  auto const &sched = opts.schedule;
  sched.validate();
  if (opts.steps_per_iter < 0) {
    throw InvalidArgument("steps per iteration must be >= 0");
  }
  IrakiResult res;
  if (problem.rate == 1) {
    res.ksp = problem.data;
    res.initial_grappa = problem.data;
    return res;
  }

  auto restore = [&](MultiCoilKspace const &k) { return reinsert_lines(k, problem.data, problem.acquired); };

  KernelGeometry ggeom = sched.grappa_geom;
  ggeom.rate = problem.rate;
  MultiCoilKspace grappa_fill;
  try {
    ReconProblem p = problem;
    p.reinsert = false;
    grappa_fill = grappa_reconstruct(p, ggeom, opts.grappa_lambda);
  } catch (InsufficientAcs const &e) {
    throw InsufficientAcs(fmt::format("initial GRAPPA stage: {}", e.what()), e.required_rows);
  }
  res.initial_grappa = restore(grappa_fill);
  if (sched.n_iter == 0) {
    res.ksp = problem.reinsert ? res.initial_grappa : grappa_fill;
    return res;
  }

  NetworkConfig const cfg = iraki_network(opts, problem.data.coils(), problem.rate);

  int const lines = std::min(sched.augmented_lines, problem.data.ny());
  res.weights = init_weights(cfg, opts.seed);
  MultiCoilKspace working = res.initial_grappa;
  for (int j = 0; j < sched.n_iter; j++) {
    if (j > 0) {
      working = restore(raki_interpolate_offgrid(problem.data, res.weights, cfg, problem.offset));
    }
    TrainingSet set;
    try {
      set = make_training_set(extract_central_lines(working, lines), cfg);
    } catch (InsufficientAcs const &e) {
      throw InsufficientAcs(fmt::format("iterative stage {}: {}", j, e.what()), e.required_rows);
    }
    double const eta = sched.rate_at(j);
    res.stages.push_back(train_from(res.weights, set, cfg, eta, opts.steps_per_iter));
    res.etas.push_back(eta);
    if (observer) {
      observer(j, eta, res.weights);
    }
  }
  auto recon = raki_interpolate_offgrid(problem.data, res.weights, cfg, problem.offset);
  res.ksp = problem.reinsert ? restore(recon) : std::move(recon);
  return res;
}

IrakiResult iraki_reconstruct(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern, IrakiOptions const &opts)
{
  return iraki_reconstruct(ReconProblem::inline_acs(ksp_us, pattern), opts);
}

IrakiResult iraki_reconstruct_prescan(MultiCoilKspace const &ksp_us, SamplingPattern const &pattern,
                                      MultiCoilKspace const &prescan_ksp, IrakiOptions const &opts)
{
  return iraki_reconstruct(ReconProblem::prescan(ksp_us, pattern, prescan_ksp), opts);
}

} // namespace pmri
