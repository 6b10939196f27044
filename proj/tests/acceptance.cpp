// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "helpers.hpp"
#include "pmri/grappa.hpp"
#include "pmri/metrics.hpp"
#include "pmri/raki.hpp"
#include "pmri/recon.hpp"
#include "pmri/schedule.hpp"
#include "pmri/vcc.hpp"

namespace fs = std::filesystem;
using namespace pmri;
using namespace testing;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v)
{
  std::ranges::sort(v);
  auto const n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RealImage rss_of(MultiCoilKspace const &k) { return rss_combine(ifft2c(k)); }

// 1. GRAPPA reproduces harmonic-coil data exactly.
Outcome grappa_oracle()
{
  auto const t0 = Clock::now();
  auto const full = harmonic_kspace(8, 3, 128, 128);
  auto const p = SamplingPattern::centered(128, 4, 18);
  auto const recon = grappa_reconstruct(zero_fill(full, p), p, KernelGeometry{2, 5, 4});
  double const e = nmse(rss_of(recon), rss_of(full), make_mask(rss_of(full)));
  double const t = seconds_since(t0);
  return {e < 1e-10 && t < 5.0, fmt::format("NMSE {:.3e} (< 1e-10), {:.2f} s (< 5 s)", e, t)};
}

// 2. Analytic gradients against central finite differences over every real parameter.
Outcome gradient_check()
{
  auto const t0 = Clock::now();
  NetworkConfig cfg{.n_coils = 2, .rate = 2, .ky1 = 2, .kx1 = 3, .channels1 = 4, .channels2 = 3, .kx3 = 3};
  auto w = init_weights(cfg, 11);
  auto const k = random_ksp(2, 9, 12, 12);
  auto const targets = forward(random_ksp(2, 9, 12, 13), init_weights(cfg, 14), cfg).values;
  auto lg = gradients(k, targets, w, cfg);
  double const h = 1e-6;
  double worst = 0.0;
  auto entries = w.entries();
  auto grads = lg.grad.entries();
  for (std::size_t i = 0; i < entries.size(); i++) {
    for (int part = 0; part < 2; part++) {
      Cx const orig = *entries[i];
      Cx const step = part == 0 ? Cx{h, 0} : Cx{0, h};
      *entries[i] = orig + step;
      double const lp = mse_loss(forward(k, w, cfg).values, targets);
      *entries[i] = orig - step;
      double const lm = mse_loss(forward(k, w, cfg).values, targets);
      *entries[i] = orig;
      double const fd = (lp - lm) / (2 * h);
      double const an = part == 0 ? grads[i]->real() : grads[i]->imag();
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
  double const t = seconds_since(t0);
  return {worst < 1e-4 && t < 10.0,
          fmt::format("{} real parameters, max relative error {:.3e} (< 1e-4), {:.2f} s (< 10 s)",
                      w.real_parameter_count(), worst, t)};
}

// 3. A bias-free network with a positively homogeneous activation is positively homogeneous.
Outcome homogeneity()
{
  NetworkConfig cfg{.n_coils = 4, .rate = 3, .ky1 = 2, .kx1 = 5, .channels1 = 16, .channels2 = 8, .kx3 = 5};
  auto const w = init_weights(cfg, 21);
  auto const p = SamplingPattern::centered(48, 3, 0);
  auto const k = zero_fill(random_ksp(4, 48, 20, 22), p);
  auto const base = raki_interpolate(k, w, cfg, p);
  double worst = 0.0;
  for (double c : {0.5, 2.0, 10.0}) {
    MultiCoilKspace scaled = k;
    for (auto &v : scaled.data()) {
      v *= c;
    }
    auto const out = raki_interpolate(scaled, w, cfg, p);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < out.size(); i++) {
      num += std::norm(out.data()[i] - c * base.data()[i]);
      den += std::norm(c * base.data()[i]);
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst <= 1e-12, fmt::format("max relative error over c in {{0.5, 2, 10}}: {:.3e} (<= 1e-12)", worst)};
}

// 4. Learning-rate schedule arithmetic.
Outcome schedule_arithmetic()
{
  auto const r4 = build_schedule(4).rates();
  auto const r5 = build_schedule(5).rates();
  bool ok = r4.size() == 25 && r4.front() == 5e-3;
  double worst_step = 0.0;
  for (std::size_t j = 1; j < r4.size(); j++) {
    ok = ok && r4[j] < r4[j - 1];
    worst_step = std::max(worst_step, std::abs((r4[j - 1] - r4[j]) - 2e-4));
  }
  ok = ok && worst_step < 1e-15;
  ok = ok && r5.size() == 16 && std::ranges::all_of(r5, [](double e) { return e > 0.0; });
  return {ok, fmt::format("R=4: {} stages, eta {:.1e} .. {:.1e}, step error {:.1e}; R=5: {} stages, last eta {:.1e}",
                          r4.size(), r4.front(), r4.back(), worst_step, r5.size(), r5.back())};
}

// 5. Every acquired line survives every inline method, with and without virtual coils.
Outcome acs_consistency()
{
  auto const full = simulate_kspace(shepp(64, 32, true), make_ring_array(6, 3, 0.35, 0.7, 5), 0.01, 6);
  auto const p = SamplingPattern::centered(64, 4, 18);
  auto const us = zero_fill(full, p);
  auto const mask = LineMask::from_pattern(p, us.coils(), us.ny());
  MethodOptions o;
  o.raki.net.channels1 = 16;
  o.raki.net.channels2 = 8;
  o.raki.train.steps = 20;
  o.iraki.schedule = build_schedule(4);
  o.iraki.net.channels1 = 16;
  o.iraki.net.channels2 = 8;
  o.iraki.steps_per_iter = 5;
  int checked = 0;
  std::vector<std::string> failed;
  for (auto m : {Method::grappa, Method::igrappa, Method::raki, Method::iraki}) {
    auto const plain = run_method(ReconProblem::inline_acs(us, p), m, o).ksp;
    auto const vcc = vcc_reconstruct(us, p, m, o).physical;
    for (auto const &[label, out] : {std::pair{"", &plain}, std::pair{"+vcc", &vcc}}) {
      checked++;
      if (!acquired_lines_equal(*out, us, mask)) {
        failed.push_back(method_name(m) + label);
      }
    }
  }
  return {failed.empty(), failed.empty() ? fmt::format("{} reconstructions keep every acquired line bit-identical", checked)
                                         : fmt::format("altered acquired lines: {}", fmt::join(failed, ", "))};
}

/*
 * 6. Noisy ring-coil phantoms at reference SNR 20 (mean masked RSS signal over per-component noise sigma).
 * Reference for NMSE: RSS of the noisy fully sampled acquisition. Reduced image and network sizes keep
 * the run well inside the time budget on one core.
 */
Outcome directional_claim()
{
  auto const t0 = Clock::now();
  int const n = 80, phantoms = 10;
  std::vector<double> g, r, ir, r15, r65;
  for (int i = 0; i < phantoms; i++) {
    PhantomSpec s;
    s.ny = s.nx = n;
    s.ellipses = shepp_logan();
    s.image_phase = PhaseMap{{0.3, 0.6, -0.4, 0.2, 0.1, -0.1}};
    auto const img = render_phantom(s);
    auto const coils = make_ring_array(8, 3, 0.35, 0.7, 100 + i);
    auto const clean = rss_of(simulate_kspace(img, coils, 0.0, 0));
    auto const support = make_mask(clean);
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < clean.size(); j++) {
      if (support.data()[j]) {
        sum += clean.data()[j];
        count++;
      }
    }
    double const sigma = sum / count / 20.0;
    auto const full = simulate_kspace(img, coils, sigma, 1000 + i);
    auto const ref = rss_of(full);

    MethodOptions o;
    o.raki.net.channels1 = 32;
    o.raki.net.channels2 = 16;
    o.raki.train.steps = 100;
    o.raki.train.seed = i + 1;
    o.iraki.schedule = build_schedule(4);
    o.iraki.net.channels1 = 32;
    o.iraki.net.channels2 = 16;
    o.iraki.steps_per_iter = 40;
    o.iraki.seed = i + 1;
    auto score = [&](Method m, int acs) {
      auto const p = SamplingPattern::centered(n, 4, acs);
      auto const out = run_method(ReconProblem::inline_acs(zero_fill(full, p), p), m, o);
      return evaluate(rss_of(out.ksp), ref).nmse;
    };
    g.push_back(score(Method::grappa, 18));
    r.push_back(score(Method::raki, 18));
    ir.push_back(score(Method::iraki, 18));
    r15.push_back(score(Method::raki, 15));
    r65.push_back(score(Method::raki, 65));
  }
  double const mg = median(g), mr = median(r), mir = median(ir), m15 = median(r15), m65 = median(r65);
  double const t = seconds_since(t0);
  bool const ok = mir <= mr && mir <= mg && m15 > m65 && t < 1800.0;
  return {ok, fmt::format("median NMSE over {} phantoms: iRAKI {:.4f}, RAKI {:.4f}, GRAPPA {:.4f}; "
                          "RAKI 15 ACS {:.4f} vs 65 ACS {:.4f}; {:.0f} s (< 1800 s)",
                          phantoms, mir, mr, mg, m15, m65, t)};
}

// 7. The default network fits noiseless harmonic data.
Outcome training_convergence()
{
  auto const block = extract_central_lines(harmonic_kspace(8, 3, 128, 128), 65);
  NetworkConfig cfg;
  cfg.n_coils = 8;
  cfg.rate = 4;
  auto const res = train(block, cfg, TrainOptions{.eta = 5e-3, .steps = 250, .seed = 1});
  double const ratio = res.report.final_loss / res.report.initial_loss;
  return {ratio <= 0.1, fmt::format("loss {:.3e} -> {:.3e} in {} steps, ratio {:.3e} (<= 0.1)",
                                    res.report.initial_loss, res.report.final_loss, res.report.steps, ratio)};
}

// 8. Virtual conjugate coils.
Outcome vcc_correctness()
{
  auto const k = random_ksp(3, 17, 12, 31);
  auto const s = augment_vcc(k);
  bool invariant = s.n_physical == 3 && s.data.coils() == 6;
  for (int c = 0; c < 3 && invariant; c++) {
    for (int y = 0; y < 17; y++) {
      for (int x = 0; x < 12; x++) {
        int const ry = (2 * (17 / 2) - y + 17) % 17, rx = (2 * (12 / 2) - x + 12) % 12;
        Cx const want = std::conj(k(c, ry, rx));
        invariant = invariant && std::memcmp(&want, &s.data(c + 3, y, x), sizeof(Cx)) == 0 &&
                    std::memcmp(&k(c, y, x), &s.data(c, y, x), sizeof(Cx)) == 0;
      }
    }
  }

  CoilModel real_coils{{{Harmonic{0, 0, 1.0}}, {Harmonic{0, 0, 0.4}, Harmonic{1, 0, 0.2}, Harmonic{-1, 0, 0.2}}}};
  auto const kr = simulate_kspace(shepp(32, 24), real_coils, 0.0, 0);
  auto const sr = augment_vcc(kr);
  bool real_equal = true;
  for (int c = 0; c < 2; c++) {
    real_equal = real_equal && std::ranges::equal(sr.data.coil(c + 2), kr.coil(c));
  }

  auto const full = harmonic_kspace(8, 3, 128, 128);
  auto const p = SamplingPattern::centered(128, 4, 18);
  auto const v = vcc_reconstruct(zero_fill(full, p), p, Method::grappa, MethodOptions{});
  double const e = nmse(v.image, rss_of(full), make_mask(rss_of(full)));

  return {invariant && real_equal && e < 1e-10,
          fmt::format("stack invariant {}, real object virtual == physical {}, VCC-GRAPPA NMSE {:.3e} (< 1e-10)",
                      invariant ? "bit-exact" : "VIOLATED", real_equal ? "yes" : "NO", e)};
}

// 9. Metric oracles.
Outcome metric_oracles()
{
  auto const ref = random_image(24, 20, 41, 0.1, 1.0);
  auto const mask = make_mask(ref);
  bool ok = nmse(ref, ref, mask) == 0.0;
  ok = ok && std::abs(nmse(RealImage::Zero(24, 20), ref, mask) - 1.0) <= 1e-15;

  RealImage peak = RealImage::Zero(10, 10);
  peak(0, 0) = 1.0;
  RealImage off = peak;
  for (Eigen::Index i = 1; i < off.size(); i++) {
    off.data()[i] = i % 2 ? 0.1 : -0.1;
  }
  off(0, 0) = 1.1;
  BoolImage all = BoolImage::Constant(10, 10, true);
  double const p = psnr(off, peak, all);
  ok = ok && std::abs(p - 20.0) <= 1e-12;
  ok = ok && std::abs(ssim(ref, ref, mask) - 1.0) <= 1e-15;

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; seed++) {
    auto const a = random_image(8, 8, 100 + seed);
    auto const b = random_image(8, 8, 200 + seed, 0.2, 1.0);
    BoolImage const m = BoolImage::Constant(8, 8, true);
    worst = std::max(worst, std::abs(ssim(a, b, m) - brute_force_ssim(a, b, m)));
  }
  ok = ok && worst <= 1e-10;
  return {ok, fmt::format("nmse(ref,ref) {}, nmse(0,ref) {:.17g}, psnr {:.15f} dB, ssim(ref,ref) {:.17g}, "
                          "ssim vs brute force {:.1e}",
                          nmse(ref, ref, mask), nmse(RealImage::Zero(24, 20), ref, mask), p, ssim(ref, ref, mask),
                          worst)};
}

int run_cli(std::string const &args)
{
  std::string const cmd = std::string(PMRI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int const status = std::system(cmd.c_str());
  return status != -1 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 10. Two reconstruct runs with the same config and seed give byte-identical outputs.
Outcome determinism()
{
  fs::path const root = fs::path(PMRI_TEST_WORKDIR) / "acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  auto const cfg = root / "config.json";
  std::ofstream(cfg) << nlohmann::json{{"seed", 9},
                                       {"phantom", {{"ny", 64}, {"nx", 64}, {"noise_sigma", 0.02}}},
                                       {"coils", {{"model", "ring"}}},
                                       {"method", "iraki"},
                                       {"raki", {{"channels1", 32}, {"channels2", 16}}},
                                       {"iraki", {{"steps_per_iter", 20}}}}
                          .dump();
  auto const q = [](fs::path const &p) { return "'" + p.string() + "'"; };
  if (run_cli("simulate --config " + q(cfg) + " --out " + q(root)) != 0 ||
      run_cli("undersample --config " + q(cfg) + " --in " + q(root / "reference.ksp") + " --out " + q(root)) != 0) {
    return {false, "could not prepare input data"};
  }
  for (auto const *run : {"a", "b"}) {
    if (run_cli("reconstruct --config " + q(cfg) + " --in " + q(root / "undersampled.ksp") + " --out " +
                q(root / run)) != 0) {
      return {false, fmt::format("reconstruct run {} failed", run)};
    }
  }
  auto const a = slurp(root / "a" / "recon.ksp");
  bool const same = !a.empty() && a == slurp(root / "b" / "recon.ksp") &&
                    slurp(root / "a" / "recon.pfm") == slurp(root / "b" / "recon.pfm");
  auto const report = nlohmann::json::parse(slurp(root / "a" / "report.json"));
  int const stages = report["n_stages"].get<int>();
  return {same && stages == 25,
          fmt::format("{}-stage iRAKI, recon.ksp ({} bytes) and recon.pfm {}", stages, a.size(),
                      same ? "byte-identical" : "DIFFER")};
}

} // namespace

int main()
{
  std::vector<std::pair<std::string, std::function<Outcome()>>> const criteria{
    {"GRAPPA exactness oracle", grappa_oracle},
    {"gradient check", gradient_check},
    {"positive homogeneity", homogeneity},
    {"schedule arithmetic", schedule_arithmetic},
    {"ACS consistency", acs_consistency},
    {"iRAKI <= RAKI, GRAPPA on noisy phantoms; RAKI 15 ACS worse than 65", directional_claim},
    {"training convergence", training_convergence},
    {"VCC correctness", vcc_correctness},
    {"metric oracles", metric_oracles},
    {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); i++) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (std::exception const &e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !o.pass;
    fmt::print("{} criterion {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
