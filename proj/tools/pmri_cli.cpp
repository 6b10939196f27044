// pmri: simulate, undersample, reconstruct and evaluate multi-coil acquisitions.
//
// Exit status: 0 success, 2 invalid input or configuration, 3 file or format error,
// 4 insufficient calibration data, 5 solver failure or undefined metric, 1 anything else.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pmri/config.hpp"
#include "pmri/core.hpp"
#include "pmri/image_io.hpp"
#include "pmri/ksp_io.hpp"
#include "pmri/metrics.hpp"
#include "pmri/phantom.hpp"
#include "pmri/raki.hpp"
#include "pmri/recon.hpp"
#include "pmri/vcc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmri;

namespace {

struct Overrides
{
  std::string config;
  std::optional<std::string> method;
  std::optional<int> rate;
  std::optional<int> acs;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  bool vcc = false;
  std::string out = "out";
};

void add_common(CLI::App &cmd, Overrides &o)
{
  cmd.add_option("--config", o.config, "JSON run configuration");
  cmd.add_option("--rate", o.rate, "undersampling rate R");
  cmd.add_option("--acs", o.acs, "number of ACS lines");
  cmd.add_option("--seed", o.seed, "seed for coils, noise and network initialisation");
  cmd.add_option("--out", o.out, "output directory")->capture_default_str();
}

RunConfig resolve(Overrides const &o)
{
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.method) {
    c.method = parse_method(*o.method);
  }
  if (o.rate) {
    c.rate = *o.rate;
  }
  if (o.acs) {
    c.acs = *o.acs;
  }
  if (o.seed) {
    c.seed = *o.seed;
  }
  if (o.steps) {
    c.raki_steps = *o.steps;
    c.steps_per_iter = *o.steps;
  }
  if (o.vcc) {
    c.vcc = true;
  }
  c.validate();
  return c;
}

fs::path prepare(std::string const &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create output directory {}: {}", dir, ec.message()));
  }
  return dir;
}

void write_json(fs::path const &path, json const &j)
{
  auto const text = j.dump(2) + "\n";
  write_file(path, std::vector<char>(text.begin(), text.end()));
}

RealImage magnitude(ComplexImage const &img) { return img.abs(); }

RealImage rss_image(MultiCoilKspace const &k) { return rss_combine(ifft2c(k)); }

void save_images(RealImage const &img, fs::path const &dir, std::string const &stem)
{
  save_pgm(img, dir / (stem + ".pgm"));
  save_pfm(img, dir / (stem + ".pfm"));
}

// Metric values with +inf PSNR spelled as a string, JSON having no infinity.
json metrics_json(MetricReport const &r)
{
  json j;
  j["nmse"] = r.nmse;
  j["psnr"] = std::isinf(r.psnr) ? json("inf") : json(r.psnr);
  j["ssim"] = r.ssim;
  j["mask_fraction"] = r.mask_fraction;
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_simulate(Overrides const &o)
{
  auto const cfg = resolve(o);
  auto const dir = prepare(o.out);
  auto const spec = cfg.phantom();
  auto const coils = cfg.coils();
  auto const truth = render_phantom(spec);
  auto const ksp = quantize_f32(simulate_kspace(truth, coils, spec.noise_sigma, cfg.seed));
  save_ksp(ksp, dir / "reference.ksp");
  save_images(magnitude(truth), dir, "truth");
  save_images(rss_image(ksp), dir, "reference");
  if (cfg.calibration == "prescan") {
    // Low-resolution pre-scan with proton-density-like contrast: every ellipse contributes positively.
    PhantomSpec pd = spec;
    for (auto &e : pd.ellipses) {
      e.intensity = std::abs(e.intensity);
    }
    auto const pre = simulate_kspace(render_phantom(pd), coils, spec.noise_sigma, cfg.seed + 1);
    save_ksp(quantize_f32(extract_central_lines(pre, cfg.prescan_lines)), dir / "prescan.ksp");
  }
  write_json(dir / "config.json", cfg.to_json());
  fmt::print("simulated {} coils, {}x{} -> {}\n", ksp.coils(), ksp.ny(), ksp.nx(), (dir / "reference.ksp").string());
  return 0;
}

int cmd_undersample(Overrides const &o, std::string const &input)
{
  auto const cfg = resolve(o);
  auto const dir = prepare(o.out);
  auto const full = load_ksp(input);
  if (full.ny() != cfg.ny) {
    throw DimensionError(fmt::format("{} has {} phase-encode lines, config says {}", input, full.ny(), cfg.ny));
  }
  auto const pattern = cfg.pattern();
  auto const us = zero_fill(full, pattern);
  save_ksp(us, dir / "undersampled.ksp");
  save_images(rss_image(us), dir, "zero_filled");
  write_json(dir / "config.json", cfg.to_json());
  fmt::print("kept {} of {} lines (R={}, {} ACS) -> {}\n", pattern.acquired_lines(full.ny()).size(), full.ny(),
             pattern.rate, pattern.acs_count, (dir / "undersampled.ksp").string());
  return 0;
}

int cmd_reconstruct(Overrides const &o, std::string const &input, std::string const &reference_path,
                    std::string const &prescan_path)
{
  auto const t_start = std::chrono::steady_clock::now();
  auto const cfg = resolve(o);
  auto const dir = prepare(o.out);
  json timings;

  auto t0 = std::chrono::steady_clock::now();
  auto const us = load_ksp(input);
  if (us.ny() != cfg.ny) {
    throw DimensionError(fmt::format("{} has {} phase-encode lines, config says {}", input, us.ny(), cfg.ny));
  }
  std::optional<RealImage> reference;
  if (!reference_path.empty()) {
    reference = rss_image(load_ksp(reference_path));
  }
  std::optional<MultiCoilKspace> prescan;
  if (cfg.calibration == "prescan") {
    if (prescan_path.empty()) {
      throw InvalidArgument("calibration mode \"prescan\" needs --prescan PATH");
    }
    prescan = load_ksp(prescan_path);
  }
  timings["load"] = seconds_since(t0);

  auto const pattern = cfg.pattern();
  auto opts = cfg.method_options();
  int const nc = us.coils();

  t0 = std::chrono::steady_clock::now();
  ReconProblem problem;
  if (cfg.vcc) {
    problem = prescan ? vcc_problem_prescan(us, pattern, *prescan) : vcc_problem(us, pattern);
  } else {
    problem = prescan ? ReconProblem::prescan(us, pattern, *prescan) : ReconProblem::inline_acs(us, pattern);
  }
  timings["setup"] = seconds_since(t0);

  // Per-stage timing and, with a reference, the NMSE each stage's network would deliver.
  json stage_times = json::array();
  json stage_nmse = json::array();
  auto stage_clock = std::chrono::steady_clock::now();
  StageObserver observer = [&](int, double, RakiWeights const &w) {
    stage_times.push_back(seconds_since(stage_clock));
    if (reference) {
      auto const net = iraki_network(opts.iraki, problem.data.coils(), problem.rate);
      auto k = reinsert_lines(raki_interpolate_offgrid(problem.data, w, net, problem.offset), problem.data,
                              problem.acquired);
      auto img = rss_combine(ifft2c(k), nc);
      stage_nmse.push_back(nmse(img, *reference, make_mask(*reference, cfg.mask_threshold)));
    }
    stage_clock = std::chrono::steady_clock::now();
  };

  t0 = std::chrono::steady_clock::now();
  stage_clock = t0;
  ReconOutput out;
  MultiCoilKspace recon;
  if (cfg.vcc) {
    auto r = vcc_reconstruct(problem, nc, cfg.method, opts, observer);
    recon = std::move(r.physical);
    out = std::move(r.output);
  } else {
    out = run_method(problem, cfg.method, opts, observer);
    recon = out.ksp;
  }
  timings["reconstruct"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  RealImage const image = rss_image(recon);
  save_ksp(recon, dir / "recon.ksp");
  save_images(image, dir, "recon");
  write_json(dir / "config.json", cfg.to_json());
  timings["write"] = seconds_since(t0);

  json report;
  report["config"] = cfg.to_json();
  report["method"] = method_name(cfg.method);
  report["vcc"] = cfg.vcc;
  report["calibration"] = cfg.calibration;
  report["dims"] = {recon.coils(), recon.ny(), recon.nx()};
  report["n_stages"] = out.stages.size();
  json stages = json::array();
  for (std::size_t i = 0; i < out.stages.size(); i++) {
    auto const &s = out.stages[i];
    json st{{"index", i},
            {"eta", out.etas.at(i)},
            {"steps", s.steps},
            {"initial_loss", s.initial_loss},
            {"final_loss", s.final_loss},
            {"loss", s.loss}};
    if (i < stage_times.size() && cfg.method == Method::iraki) {
      st["seconds"] = stage_times[i];
    }
    if (i < stage_nmse.size()) {
      st["nmse"] = stage_nmse[i];
    }
    stages.push_back(st);
  }
  report["stages"] = stages;
  if (reference) {
    auto const m = evaluate(image, *reference, cfg.mask_threshold);
    report["metrics"] = metrics_json(m);
    fmt::print("{}", m.serialize());
  }
  timings["total"] = seconds_since(t_start);
  report["timings_s"] = timings;
  write_json(dir / "report.json", report);
  fmt::print("{} reconstruction ({} stage{}) -> {}\n", method_name(cfg.method), out.stages.size(),
             out.stages.size() == 1 ? "" : "s", (dir / "recon.ksp").string());
  return 0;
}

RealImage load_image(std::string const &path)
{
  auto const bytes = read_file(path);
  if (bytes.size() >= 4 && std::string(bytes.data(), 4) == "KSP1") {
    return rss_image(decode_ksp(bytes));
  }
  return load_pfm(path);
}

int cmd_evaluate(std::string const &recon_path, std::string const &reference_path, double threshold,
                 std::string const &out_dir)
{
  auto const recon = load_image(recon_path);
  auto const reference = load_image(reference_path);
  auto const report = evaluate(recon, reference, threshold);
  auto const text = report.serialize();
  fmt::print("{}", text);
  if (!out_dir.empty()) {
    auto const dir = prepare(out_dir);
    write_file(dir / "metrics.txt", std::vector<char>(text.begin(), text.end()));
    write_json(dir / "metrics.json", metrics_json(report));
  }
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Scan-specific parallel MRI reconstruction toolkit"};
  app.require_subcommand(1);

  Overrides sim_o, us_o, rec_o;
  std::string us_in, rec_in, rec_ref, rec_prescan, ev_recon, ev_ref, ev_out;
  double ev_threshold = 0.05;

  auto *sim = app.add_subcommand("simulate", "write a phantom acquisition (reference.ksp, truth/reference images)");
  add_common(*sim, sim_o);

  auto *us = app.add_subcommand("undersample", "zero-fill a fully sampled k-space per the sampling pattern");
  add_common(*us, us_o);
  us->add_option("--in", us_in, "fully sampled KSP file")->required();

  auto *rec = app.add_subcommand("reconstruct", "reconstruct an undersampled KSP file");
  add_common(*rec, rec_o);
  rec->add_option("--in", rec_in, "zero-filled KSP file")->required();
  rec->add_option("--method", rec_o.method, "grappa | igrappa | raki | iraki");
  rec->add_flag("--vcc", rec_o.vcc, "add virtual conjugate coils");
  rec->add_option("--steps", rec_o.steps, "Adam steps per training stage");
  rec->add_option("--reference", rec_ref, "fully sampled KSP file for NMSE/PSNR/SSIM in the report");
  rec->add_option("--prescan", rec_prescan, "separately acquired calibration KSP file");

  auto *ev = app.add_subcommand("evaluate", "compare a reconstruction against a reference (PFM or KSP files)");
  ev->add_option("--recon", ev_recon, "reconstruction")->required();
  ev->add_option("--reference", ev_ref, "reference")->required();
  ev->add_option("--mask-threshold", ev_threshold, "mask fraction of the reference maximum")->capture_default_str();
  ev->add_option("--out", ev_out, "directory for metrics.txt and metrics.json");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      return cmd_simulate(sim_o);
    }
    if (*us) {
      return cmd_undersample(us_o, us_in);
    }
    if (*rec) {
      return cmd_reconstruct(rec_o, rec_in, rec_ref, rec_prescan);
    }
    if (*ev) {
      return cmd_evaluate(ev_recon, ev_ref, ev_threshold, ev_out);
    }
  } catch (InvalidArgument const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (DimensionError const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (IoError const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (FormatError const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (InsufficientAcs const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 4;
  } catch (SolverError const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 5;
  } catch (UndefinedMetric const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 5;
  } catch (std::exception const &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
