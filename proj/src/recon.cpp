#include "pmri/recon.hpp"

#include <fmt/format.h>

#include "pmri/grappa.hpp"

namespace pmri {

Method parse_method(std::string const &name)
{
  if (name == "grappa") {
    return Method::grappa;
  }
  if (name == "igrappa") {
    return Method::igrappa;
  }
  if (name == "raki") {
    return Method::raki;
  }
  if (name == "iraki") {
    return Method::iraki;
  }
  throw InvalidArgument(fmt::format("unknown method '{}' (expected grappa, igrappa, raki or iraki)", name));
}

std::string method_name(Method m)
{
  switch (m) {
  case Method::grappa: return "grappa";
  case Method::igrappa: return "igrappa";
  case Method::raki: return "raki";
  case Method::iraki: return "iraki";
  }
  return "?";
}

ReconOutput run_method(ReconProblem const &problem, Method method, MethodOptions const &opts,
                       StageObserver const &observer)
{
  ReconOutput out;
  KernelGeometry geom = opts.grappa_geom;
  geom.rate = problem.rate;
  switch (method) {
  case Method::grappa:
    out.ksp = grappa_reconstruct(problem, geom, opts.lambda);
    break;
  case Method::igrappa:
    out.ksp = igrappa_reconstruct(problem, geom, opts.iraki.schedule, opts.lambda);
    break;
  case Method::raki: {
    auto r = raki_reconstruct(problem, opts.raki);
    out.ksp = std::move(r.ksp);
    if (problem.rate > 1) {
      out.stages.push_back(std::move(r.report));
      out.etas.push_back(opts.raki.train.eta);
    }
    break;
  }
  case Method::iraki: {
    auto r = iraki_reconstruct(problem, opts.iraki, observer);
    out.ksp = std::move(r.ksp);
    out.stages = std::move(r.stages);
    out.etas = std::move(r.etas);
    break;
  }
  }
  return out;
}

} // namespace pmri
