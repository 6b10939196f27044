#include "pmri/config.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "pmri/ksp_io.hpp"

namespace pmri {

using nlohmann::json;

namespace {

void only_keys(json const &obj, std::string const &where, std::set<std::string> const &allowed)
{
  if (!obj.is_object()) {
    throw InvalidArgument(fmt::format("config: '{}' must be an object", where));
  }
  for (auto const &[key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw InvalidArgument(fmt::format("config: unknown key '{}{}'", where.empty() ? "" : where + ".", key));
    }
  }
}

template <typename T>
void read(json const &obj, char const *key, T &dst, std::string const &where)
{
  if (!obj.contains(key)) {
    return;
  }
  try {
    dst = obj.at(key).get<T>();
  } catch (json::exception const &) {
    throw InvalidArgument(fmt::format("config: '{}{}' has the wrong type", where.empty() ? "" : where + ".", key));
  }
}

template <typename T>
void read_optional(json const &obj, char const *key, std::optional<T> &dst, std::string const &where)
{
  if (!obj.contains(key)) {
    return;
  }
  if (obj.at(key).is_null()) {
    dst.reset();
    return;
  }
  T v{};
  read(obj, key, v, where);
  dst = v;
}

void require(bool ok, std::string const &msg)
{
  if (!ok) {
    throw InvalidArgument("config: " + msg);
  }
}

} // namespace

RunConfig RunConfig::from_json(json const &j)
{
  RunConfig c;
  only_keys(j, "", {"seed", "phantom", "coils", "pattern", "method", "vcc", "calibration", "grappa", "raki", "iraki",
                    "metrics"});
  read(j, "seed", c.seed, "");
  if (j.contains("phantom")) {
    auto const &p = j.at("phantom");
    only_keys(p, "phantom", {"ny", "nx", "noise_sigma", "image_phase", "ellipses"});
    read(p, "ny", c.ny, "phantom");
    read(p, "nx", c.nx, "phantom");
    read(p, "noise_sigma", c.noise_sigma, "phantom");
    if (p.contains("image_phase") && !p.at("image_phase").is_null()) {
      std::vector<double> coeffs;
      read(p, "image_phase", coeffs, "phantom");
      require(coeffs.size() == 6, "phantom.image_phase needs 6 coefficients");
      PhaseMap m;
      std::copy(coeffs.begin(), coeffs.end(), m.coeffs.begin());
      c.image_phase = m;
    }
    if (p.contains("ellipses")) {
      auto const &e = p.at("ellipses");
      if (e.is_string()) {
        require(e.get<std::string>() == "shepp_logan", "phantom.ellipses must be \"shepp_logan\" or a list");
      } else {
        std::vector<std::vector<double>> rows;
        read(p, "ellipses", rows, "phantom");
        c.ellipses.clear();
        for (auto const &r : rows) {
          require(r.size() == 6, "each ellipse is [cx, cy, rx, ry, angle_deg, intensity]");
          c.ellipses.push_back(Ellipse{r[0], r[1], r[2], r[3], r[4], r[5]});
        }
        c.shepp_logan_ellipses = false;
      }
    }
  }
  if (j.contains("coils")) {
    auto const &p = j.at("coils");
    only_keys(p, "coils", {"model", "n_coils", "max_harmonic", "width", "radius"});
    read(p, "model", c.coil_model, "coils");
    read(p, "n_coils", c.n_coils, "coils");
    read(p, "max_harmonic", c.max_harmonic, "coils");
    read(p, "width", c.coil_width, "coils");
    read(p, "radius", c.coil_radius, "coils");
  }
  if (j.contains("pattern")) {
    auto const &p = j.at("pattern");
    only_keys(p, "pattern", {"rate", "acs", "offset"});
    read(p, "rate", c.rate, "pattern");
    read(p, "acs", c.acs, "pattern");
    read(p, "offset", c.offset, "pattern");
  }
  if (j.contains("method")) {
    std::string m;
    read(j, "method", m, "");
    c.method = parse_method(m);
  }
  read(j, "vcc", c.vcc, "");
  if (j.contains("calibration")) {
    auto const &p = j.at("calibration");
    only_keys(p, "calibration", {"mode", "prescan_lines"});
    read(p, "mode", c.calibration, "calibration");
    read(p, "prescan_lines", c.prescan_lines, "calibration");
  }
  if (j.contains("grappa")) {
    auto const &p = j.at("grappa");
    only_keys(p, "grappa", {"ky", "kx", "lambda"});
    read(p, "ky", c.grappa_ky, "grappa");
    read(p, "kx", c.grappa_kx, "grappa");
    read(p, "lambda", c.lambda, "grappa");
  }
  if (j.contains("raki")) {
    auto const &p = j.at("raki");
    only_keys(p, "raki", {"ky", "kx", "channels1", "channels2", "kx3", "leaky_slope", "eta", "steps"});
    read(p, "ky", c.raki_ky, "raki");
    read(p, "kx", c.raki_kx, "raki");
    read(p, "channels1", c.channels1, "raki");
    read(p, "channels2", c.channels2, "raki");
    read(p, "kx3", c.kx3, "raki");
    read(p, "leaky_slope", c.leaky_slope, "raki");
    read(p, "eta", c.raki_eta, "raki");
    read(p, "steps", c.raki_steps, "raki");
  }
  if (j.contains("iraki")) {
    auto const &p = j.at("iraki");
    only_keys(p, "iraki", {"eta0", "delta_eta", "n_iter", "augmented_lines", "steps_per_iter", "ky", "kx"});
    read(p, "eta0", c.eta0, "iraki");
    read_optional(p, "delta_eta", c.delta_eta, "iraki");
    read_optional(p, "n_iter", c.n_iter, "iraki");
    read(p, "augmented_lines", c.augmented_lines, "iraki");
    read(p, "steps_per_iter", c.steps_per_iter, "iraki");
    read(p, "ky", c.iraki_ky, "iraki");
    read(p, "kx", c.iraki_kx, "iraki");
  }
  if (j.contains("metrics")) {
    auto const &p = j.at("metrics");
    only_keys(p, "metrics", {"mask_threshold"});
    read(p, "mask_threshold", c.mask_threshold, "metrics");
  }
  return c;
}

RunConfig RunConfig::load(std::string const &path)
{
  auto const bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (json::parse_error const &e) {
    throw InvalidArgument(fmt::format("config {}: {}", path, e.what()));
  }
  return from_json(j);
}

json RunConfig::to_json() const
{
  json j;
  j["seed"] = seed;
  json ph;
  ph["ny"] = ny;
  ph["nx"] = nx;
  ph["noise_sigma"] = noise_sigma;
  ph["image_phase"] = image_phase ? json(std::vector<double>(image_phase->coeffs.begin(), image_phase->coeffs.end()))
                                  : json(nullptr);
  if (shepp_logan_ellipses) {
    ph["ellipses"] = "shepp_logan";
  } else {
    json list = json::array();
    for (auto const &e : ellipses) {
      list.push_back({e.cx, e.cy, e.rx, e.ry, e.angle_deg, e.intensity});
    }
    ph["ellipses"] = list;
  }
  j["phantom"] = ph;
  j["coils"] = {{"model", coil_model}, {"n_coils", n_coils}, {"max_harmonic", max_harmonic}, {"width", coil_width},
                {"radius", coil_radius}};
  j["pattern"] = {{"rate", rate}, {"acs", acs}, {"offset", offset}};
  j["method"] = method_name(method);
  j["vcc"] = vcc;
  j["calibration"] = {{"mode", calibration}, {"prescan_lines", prescan_lines}};
  j["grappa"] = {{"ky", grappa_ky}, {"kx", grappa_kx}, {"lambda", lambda}};
  j["raki"] = {{"ky", raki_ky},     {"kx", raki_kx},   {"channels1", channels1},     {"channels2", channels2},
               {"kx3", kx3},        {"eta", raki_eta}, {"leaky_slope", leaky_slope}, {"steps", raki_steps}};
  j["iraki"] = {{"eta0", eta0},
                {"delta_eta", delta_eta ? json(*delta_eta) : json(nullptr)},
                {"n_iter", n_iter ? json(*n_iter) : json(nullptr)},
                {"augmented_lines", augmented_lines},
                {"steps_per_iter", steps_per_iter},
                {"ky", iraki_ky},
                {"kx", iraki_kx}};
  j["metrics"] = {{"mask_threshold", mask_threshold}};
  return j;
}

void RunConfig::validate() const
{
  require(ny >= 1 && nx >= 1, fmt::format("phantom extents must be >= 1, got {}x{}", ny, nx));
  require(noise_sigma >= 0.0, "phantom.noise_sigma must be >= 0");
  require(coil_model == "harmonic" || coil_model == "ring", "coils.model must be \"harmonic\" or \"ring\"");
  require(n_coils >= 1, "coils.n_coils must be >= 1");
  require(max_harmonic >= 0, "coils.max_harmonic must be >= 0");
  require(coil_model != "harmonic" || max_harmonic <= n_coils - 1,
          "coils.max_harmonic must be <= n_coils - 1 for harmonic coils");
  require(coil_width > 0.0, "coils.width must be > 0");
  require(rate >= 1, fmt::format("pattern.rate must be >= 1, got {}", rate));
  require(acs >= 0 && acs <= ny, fmt::format("pattern.acs must lie in [0, {}], got {}", ny, acs));
  require(offset >= 0 && offset < rate, fmt::format("pattern.offset must lie in [0, {}), got {}", rate, offset));
  require(calibration == "inline" || calibration == "prescan", "calibration.mode must be \"inline\" or \"prescan\"");
  require(prescan_lines >= 1 && prescan_lines <= ny, "calibration.prescan_lines must lie in [1, ny]");
  require(lambda >= 0.0, "grappa.lambda must be >= 0");
  require(raki_eta > 0.0, "raki.eta must be > 0");
  require(raki_steps >= 0 && steps_per_iter >= 0, "step counts must be >= 0");
  require(mask_threshold >= 0.0 && mask_threshold < 1.0, "metrics.mask_threshold must lie in [0, 1)");
  require(augmented_lines >= 1, "iraki.augmented_lines must be >= 1");
  if (rate >= 2) {
    KernelGeometry{grappa_ky, grappa_kx, rate}.validate();
    method_options().raki.net.validate();
    schedule().validate();
  }
}

PhantomSpec RunConfig::phantom() const
{
  return PhantomSpec{ny, nx, ellipses, image_phase, noise_sigma, seed};
}

CoilModel RunConfig::coils() const
{
  if (coil_model == "ring") {
    return make_ring_array(n_coils, max_harmonic, coil_width, coil_radius, seed);
  }
  return make_harmonic_array(n_coils, max_harmonic, seed);
}

SamplingPattern RunConfig::pattern() const { return SamplingPattern::centered(ny, rate, acs, offset); }

IrakiSchedule RunConfig::schedule() const
{
  IrakiSchedule s = build_schedule(std::clamp(rate, 2, 8));
  s.eta0 = eta0;
  if (delta_eta) {
    s.delta_eta = *delta_eta;
  }
  s.n_iter = n_iter ? *n_iter : iteration_count(s.eta0, s.delta_eta);
  s.augmented_lines = augmented_lines;
  s.grappa_geom = KernelGeometry{grappa_ky, grappa_kx, std::max(rate, 1)};
  s.raki_ky = iraki_ky;
  s.raki_kx = iraki_kx;
  return s;
}

MethodOptions RunConfig::method_options() const
{
  MethodOptions o;
  o.grappa_geom = KernelGeometry{grappa_ky, grappa_kx, std::max(rate, 1)};
  o.lambda = lambda;
  NetworkConfig net;
  net.n_coils = n_coils;
  net.rate = std::max(rate, 2);
  net.ky1 = raki_ky;
  net.kx1 = raki_kx;
  net.channels1 = channels1;
  net.channels2 = channels2;
  net.kx3 = kx3;
  net.leaky_slope = leaky_slope;
  o.raki.net = net;
  o.raki.train = TrainOptions{raki_eta, raki_steps, seed};
  o.iraki.schedule = schedule();
  o.iraki.net = net;
  o.iraki.steps_per_iter = steps_per_iter;
  o.iraki.seed = seed;
  o.iraki.grappa_lambda = lambda;
  return o;
}

} // namespace pmri
