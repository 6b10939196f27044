#pragma once

#include <string>
#include <vector>

#include "iraki.hpp"
#include "problem.hpp"
#include "raki.hpp"
#include "windows.hpp"

namespace pmri {

enum class Method { grappa, igrappa, raki, iraki };

Method parse_method(std::string const &name);
std::string method_name(Method m);

// Settings for every method; each reconstruction reads only what it needs.
struct MethodOptions
{
  KernelGeometry grappa_geom{2, 5, 4}; // rate is taken from the problem
  double lambda = 0.0;
  RakiOptions raki;
  IrakiOptions iraki;
};

struct ReconOutput
{
  MultiCoilKspace ksp;
  std::vector<TrainReport> stages; // one per training run (RAKI: 1, iRAKI: n_iter)
  std::vector<double> etas;
};

// The observer sees every iRAKI training stage; other methods ignore it.
ReconOutput run_method(ReconProblem const &problem, Method method, MethodOptions const &opts,
                       StageObserver const &observer = {});

} // namespace pmri
