#include "pmri/raki.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "pmri/core.hpp"
#include "pmri/ksp_io.hpp"
#include "pmri/rng.hpp"

namespace pmri {

void NetworkConfig::validate() const
{
  if (n_coils < 1) {
    throw InvalidArgument(fmt::format("network needs >= 1 coil, got {}", n_coils));
  }
  if (rate < 2) {
    throw InvalidArgument(fmt::format("network needs rate >= 2 (nothing to predict at R={})", rate));
  }
  layer1_geometry().validate();
  if (kx3 < 1 || kx3 % 2 == 0) {
    throw InvalidArgument(fmt::format("layer 3 readout width must be odd, got {}", kx3));
  }
  if (channels1 < 1 || channels2 < 1) {
    throw InvalidArgument("hidden layers need >= 1 channel");
  }
  if (!(leaky_slope > 0.0)) {
    throw InvalidArgument("leaky slope must be > 0");
  }
}

RakiWeights RakiWeights::zeros(NetworkConfig const &cfg)
{
  return {Eigen::MatrixXcd::Zero(cfg.channels1, cfg.n_coils * cfg.ky1 * cfg.kx1),
          Eigen::MatrixXcd::Zero(cfg.channels2, cfg.channels1),
          Eigen::MatrixXcd::Zero(cfg.out_channels(), cfg.channels2 * cfg.kx3)};
}

namespace {

bool same_bits(Eigen::MatrixXcd const &a, Eigen::MatrixXcd const &b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), std::size_t(a.size()) * sizeof(Cx)) == 0;
}

// Visits (out, col) in row-major order, matching the (out, in, ky, kx) flattening.
template <typename F>
void for_each_row_major(Eigen::MatrixXcd &m, F &&f)
{
  for (Eigen::Index o = 0; o < m.rows(); o++) {
    for (Eigen::Index k = 0; k < m.cols(); k++) {
      f(m(o, k));
    }
  }
}

} // namespace

bool RakiWeights::bit_equal(RakiWeights const &o) const
{
  return same_bits(w1, o.w1) && same_bits(w2, o.w2) && same_bits(w3, o.w3);
}

std::vector<Cx *> RakiWeights::entries()
{
  std::vector<Cx *> out;
  for (auto *m : {&w1, &w2, &w3}) {
    for_each_row_major(*m, [&](Cx &v) { out.push_back(&v); });
  }
  return out;
}

RakiWeights init_weights(NetworkConfig const &cfg, std::uint64_t seed)
{
  cfg.validate();
  RakiWeights w = RakiWeights::zeros(cfg);
  Rng rng(seed);
  auto fill = [&](Eigen::MatrixXcd &m) {
    double const b = 1.0 / std::sqrt(2.0 * double(m.cols()));
    for_each_row_major(m, [&](Cx &v) {
      double const re = rng.uniform(-b, b);
      double const im = rng.uniform(-b, b);
      v = Cx{re, im};
    });
  };
  fill(w.w1);
  fill(w.w2);
  fill(w.w3);
  return w;
}

namespace {

void activate(Eigen::MatrixXcd &z, double alpha)
{
  Cx *p = z.data();
  for (Eigen::Index i = 0; i < z.size(); i++) {
    p[i] = cleaky_relu(p[i], alpha);
  }
}

// Chain rule through CLeakyReLU; the sign of an activation equals the sign of its pre-activation.
void apply_activation_derivative(Eigen::MatrixXcd &grad, Eigen::MatrixXcd const &act, double alpha)
{
  Cx *g = grad.data();
  Cx const *a = act.data();
  for (Eigen::Index i = 0; i < grad.size(); i++) {
    double const dr = a[i].real() >= 0.0 ? 1.0 : alpha;
    double const di = a[i].imag() >= 0.0 ? 1.0 : alpha;
    g[i] = Cx{g[i].real() * dr, g[i].imag() * di};
  }
}

// Readout im2col of a hidden layer: row i * k + t, column w * cols_out + x <- a(i, w * cols_in + x + t).
Eigen::MatrixXcd readout_patches(Eigen::MatrixXcd const &a, int anchors, int cols_in, int k)
{
  int const cols_out = cols_in - k + 1;
  Eigen::MatrixXcd p(a.rows() * k, Eigen::Index(anchors) * cols_out);
  for (int w = 0; w < anchors; w++) {
    for (int x = 0; x < cols_out; x++) {
      Eigen::Index const col = Eigen::Index(w) * cols_out + x;
      for (int t = 0; t < k; t++) {
        Eigen::Index const src = Eigen::Index(w) * cols_in + x + t;
        for (Eigen::Index i = 0; i < a.rows(); i++) {
          p(i * k + t, col) = a(i, src);
        }
      }
    }
  }
  return p;
}

Eigen::MatrixXcd readout_patches_adjoint(Eigen::MatrixXcd const &dp, Eigen::Index channels, int anchors, int cols_in,
                                         int k)
{
  int const cols_out = cols_in - k + 1;
  Eigen::MatrixXcd da = Eigen::MatrixXcd::Zero(channels, Eigen::Index(anchors) * cols_in);
  for (int w = 0; w < anchors; w++) {
    for (int x = 0; x < cols_out; x++) {
      Eigen::Index const col = Eigen::Index(w) * cols_out + x;
      for (int t = 0; t < k; t++) {
        Eigen::Index const dst = Eigen::Index(w) * cols_in + x + t;
        for (Eigen::Index i = 0; i < channels; i++) {
          da(i, dst) += dp(i * k + t, col);
        }
      }
    }
  }
  return da;
}

struct Activations
{
  Eigen::MatrixXcd a1;
  Eigen::MatrixXcd a2;
  Eigen::MatrixXcd p3;
  Eigen::MatrixXcd y;
};

Activations run_forward(Eigen::MatrixXcd const &patches, int anchors, int cols1, RakiWeights const &w,
                        NetworkConfig const &cfg)
{
  Activations act;
  act.a1.noalias() = w.w1 * patches;
  activate(act.a1, cfg.leaky_slope);
  act.a2.noalias() = w.w2 * act.a1;
  activate(act.a2, cfg.leaky_slope);
  act.p3 = readout_patches(act.a2, anchors, cols1, cfg.kx3);
  act.y.noalias() = w.w3 * act.p3;
  return act;
}

void check_weights(RakiWeights const &w, NetworkConfig const &cfg)
{
  auto const z = RakiWeights::zeros(cfg);
  if (w.w1.rows() != z.w1.rows() || w.w1.cols() != z.w1.cols() || w.w2.rows() != z.w2.rows() ||
      w.w2.cols() != z.w2.cols() || w.w3.rows() != z.w3.rows() || w.w3.cols() != z.w3.cols()) {
    throw DimensionError("network weights do not match the network configuration");
  }
}

TrainingSet windows_of(MultiCoilKspace const &ksp, NetworkConfig const &cfg, double scale)
{
  cfg.validate();
  if (ksp.coils() != cfg.n_coils) {
    throw DimensionError(fmt::format("network built for {} coils, data has {}", cfg.n_coils, ksp.coils()));
  }
  auto const geom = cfg.layer1_geometry();
  auto const windows = calibration_windows(ksp.ny(), geom);
  TrainingSet set;
  set.cols1 = ksp.nx() - cfg.kx1 + 1;
  set.cols = set.cols1 - cfg.kx3 + 1;
  if (windows.empty() || set.cols < 1) {
    throw InsufficientAcs(fmt::format("RAKI window {}x{} (layer 3 width {}) at R={} on a {}x{} block", cfg.ky1,
                                      cfg.kx1, cfg.kx3, cfg.rate, ksp.ny(), ksp.nx()),
                          geom.source_span());
  }
  set.anchors = int(windows.size());
  set.scale = scale;
  MultiCoilKspace scaled = ksp;
  if (scale != 1.0) {
    for (auto &v : scaled.data()) {
      v /= scale;
    }
  }
  set.patches = gather_patches(scaled, windows, cfg.kx1, 0);
  int const nc = cfg.n_coils, R = cfg.rate, g = cfg.target_gap(), halo = cfg.readout_halo();
  set.targets.resize(cfg.out_channels(), Eigen::Index(set.anchors) * set.cols);
  for (int w = 0; w < set.anchors; w++) {
    for (int r = 1; r < R; r++) {
      int const y = windows[std::size_t(w)].anchor + g * R + r;
      for (int c = 0; c < nc; c++) {
        auto const row = scaled.row(c, y);
        for (int x = 0; x < set.cols; x++) {
          set.targets((r - 1) * nc + c, Eigen::Index(w) * set.cols + x) = row[std::size_t(x + halo)];
        }
      }
    }
  }
  return set;
}

} // namespace

PredictionGrid forward(MultiCoilKspace const &ksp, RakiWeights const &w, NetworkConfig const &cfg)
{
  auto const set = windows_of(ksp, cfg, 1.0);
  check_weights(w, cfg);
  return {run_forward(set.patches, set.anchors, set.cols1, w, cfg).y, set.anchors, set.cols};
}

double mse_loss(Eigen::MatrixXcd const &pred, Eigen::MatrixXcd const &target)
{
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError(fmt::format("mse_loss: prediction {}x{} vs target {}x{}", pred.rows(), pred.cols(),
                                     target.rows(), target.cols()));
  }
  if (pred.size() == 0) {
    throw InvalidArgument("mse_loss needs at least one sample");
  }
  return (pred - target).squaredNorm() / double(pred.size());
}

TrainingSet make_training_set(MultiCoilKspace const &block, NetworkConfig const &cfg, bool normalize)
{
  double scale = 1.0;
  if (normalize) {
    double const m = max_abs(block);
    scale = m > 0.0 ? m : 1.0;
  }
  return windows_of(block, cfg, scale);
}

Eigen::MatrixXcd training_targets(MultiCoilKspace const &ksp, NetworkConfig const &cfg)
{
  return windows_of(ksp, cfg, 1.0).targets;
}

LossAndGradient gradients(TrainingSet const &set, RakiWeights const &w, NetworkConfig const &cfg)
{
  check_weights(w, cfg);
  auto const act = run_forward(set.patches, set.anchors, set.cols1, w, cfg);
  LossAndGradient out;
  out.loss = mse_loss(act.y, set.targets);
  Eigen::MatrixXcd const dy = (2.0 / double(act.y.size())) * (act.y - set.targets);

  out.grad.w3.noalias() = dy * act.p3.adjoint();
  Eigen::MatrixXcd const dp3 = w.w3.adjoint() * dy;
  Eigen::MatrixXcd dz2 = readout_patches_adjoint(dp3, cfg.channels2, set.anchors, set.cols1, cfg.kx3);
  apply_activation_derivative(dz2, act.a2, cfg.leaky_slope);

  out.grad.w2.noalias() = dz2 * act.a1.adjoint();
  Eigen::MatrixXcd dz1 = w.w2.adjoint() * dz2;
  apply_activation_derivative(dz1, act.a1, cfg.leaky_slope);

  out.grad.w1.noalias() = dz1 * set.patches.adjoint();
  return out;
}

LossAndGradient gradients(MultiCoilKspace const &ksp, Eigen::MatrixXcd const &targets, RakiWeights const &w,
                          NetworkConfig const &cfg)
{
  auto set = windows_of(ksp, cfg, 1.0);
  if (targets.rows() != set.targets.rows() || targets.cols() != set.targets.cols()) {
    throw DimensionError("target grid does not match the network output grid");
  }
  set.targets = targets;
  return gradients(set, w, cfg);
}

double evaluate_loss(TrainingSet const &set, RakiWeights const &w, NetworkConfig const &cfg)
{
  check_weights(w, cfg);
  return mse_loss(run_forward(set.patches, set.anchors, set.cols1, w, cfg).y, set.targets);
}

AdamState AdamState::fresh(RakiWeights const &like)
{
  AdamState s;
  s.m = {Eigen::MatrixXcd::Zero(like.w1.rows(), like.w1.cols()), Eigen::MatrixXcd::Zero(like.w2.rows(), like.w2.cols()),
         Eigen::MatrixXcd::Zero(like.w3.rows(), like.w3.cols())};
  s.v = s.m;
  return s;
}

namespace {

Eigen::Map<Eigen::ArrayXd> components(Eigen::MatrixXcd &m)
{
  return {reinterpret_cast<double *>(m.data()), 2 * m.size()};
}

Eigen::Map<Eigen::ArrayXd const> components(Eigen::MatrixXcd const &m)
{
  return {reinterpret_cast<double const *>(m.data()), 2 * m.size()};
}

} // namespace

void adam_step(RakiWeights &w, RakiWeights const &grads, AdamState &state, double eta)
{
  if (!(eta > 0.0)) {
    throw InvalidArgument("Adam learning rate must be > 0");
  }
  state.t += 1;
  double const c1 = 1.0 - std::pow(state.beta1, double(state.t));
  double const c2 = 1.0 - std::pow(state.beta2, double(state.t));
  auto update = [&](Eigen::MatrixXcd &theta, Eigen::MatrixXcd const &g, Eigen::MatrixXcd &m, Eigen::MatrixXcd &v) {
    if (theta.rows() != g.rows() || theta.cols() != g.cols() || m.rows() != g.rows() || m.cols() != g.cols()) {
      throw DimensionError("Adam: gradient or moment shape mismatch");
    }
    auto th = components(theta);
    auto const gr = components(g);
    auto mm = components(m);
    auto vv = components(v);
    mm = state.beta1 * mm + (1.0 - state.beta1) * gr;
    vv = state.beta2 * vv + (1.0 - state.beta2) * gr.square();
    th -= eta * (mm / c1) / ((vv / c2).sqrt() + state.eps);
  };
  update(w.w1, grads.w1, state.m.w1, state.v.w1);
  update(w.w2, grads.w2, state.m.w2, state.v.w2);
  update(w.w3, grads.w3, state.m.w3, state.v.w3);
}

TrainReport train_from(RakiWeights &w, TrainingSet const &set, NetworkConfig const &cfg, double eta, int steps)
{
  if (steps < 0) {
    throw InvalidArgument("training step count must be >= 0");
  }
  TrainReport report;
  report.steps = steps;
  report.scale = set.scale;
  report.loss.reserve(std::size_t(steps));
  AdamState state = AdamState::fresh(w);
  for (int s = 0; s < steps; s++) {
    auto const lg = gradients(set, w, cfg);
    if (!std::isfinite(lg.loss)) {
      throw SolverError(fmt::format("training loss became non-finite at step {}", s));
    }
    report.loss.push_back(lg.loss);
    adam_step(w, lg.grad, state, eta);
  }
  report.final_loss = evaluate_loss(set, w, cfg);
  if (!std::isfinite(report.final_loss) || !w.finite()) {
    throw SolverError("training produced non-finite weights");
  }
  report.initial_loss = steps > 0 ? report.loss.front() : report.final_loss;
  return report;
}

TrainResult train(MultiCoilKspace const &acs_block, NetworkConfig const &cfg, TrainOptions const &opts)
{
  auto const set = make_training_set(acs_block, cfg);
  TrainResult out{init_weights(cfg, opts.seed), {}};
  out.report = train_from(out.weights, set, cfg, opts.eta, opts.steps);
  return out;
}

MultiCoilKspace raki_interpolate_offgrid(MultiCoilKspace const &ksp_zf, RakiWeights const &w, NetworkConfig const &cfg,
                                         int offset)
{
  cfg.validate();
  check_weights(w, cfg);
  if (ksp_zf.coils() != cfg.n_coils) {
    throw DimensionError(fmt::format("network built for {} coils, data has {}", cfg.n_coils, ksp_zf.coils()));
  }
  int const ny = ksp_zf.ny(), nx = ksp_zf.nx(), nc = cfg.n_coils, R = cfg.rate;
  double const peak = max_abs(ksp_zf);
  double const scale = peak > 0.0 ? peak : 1.0;
  MultiCoilKspace scaled = ksp_zf;
  for (auto &v : scaled.data()) {
    v /= scale;
  }
  auto const geom = cfg.layer1_geometry();
  auto const cover = grid_windows(ny, offset, geom);
  int const halo = cfg.readout_halo();
  Eigen::MatrixXcd const patches = gather_patches(scaled, cover.windows, cfg.kx1, halo);
  int const cols1 = nx + 2 * halo - cfg.kx1 + 1;
  auto const act = run_forward(patches, int(cover.windows.size()), cols1, w, cfg);

  MultiCoilKspace out = ksp_zf;
  for (std::size_t win = 0; win < cover.windows.size(); win++) {
    for (int r = 1; r < R; r++) {
      int const y = cover.target_row(cover.windows[win], r, ny, geom);
      if (y < 0) {
        continue;
      }
      for (int c = 0; c < nc; c++) {
        auto dst = out.row(c, y);
        for (int x = 0; x < nx; x++) {
          dst[std::size_t(x)] = act.y((r - 1) * nc + c, Eigen::Index(win) * nx + x) * scale;
        }
      }
    }
  }
  return out;
}

MultiCoilKspace raki_interpolate(MultiCoilKspace const &ksp_zf, RakiWeights const &w, NetworkConfig const &cfg,
                                 SamplingPattern const &pattern)
{
  pattern.validate(ksp_zf.ny());
  if (pattern.rate == 1) {
    return ksp_zf;
  }
  if (pattern.rate != cfg.rate) {
    throw InvalidArgument(fmt::format("network rate {} does not match sampling rate {}", cfg.rate, pattern.rate));
  }
  return reinsert_lines(raki_interpolate_offgrid(ksp_zf, w, cfg, pattern.offset), ksp_zf, pattern);
}

RakiRecon raki_reconstruct(ReconProblem const &problem, RakiOptions const &opts)
{
  if (problem.rate == 1) {
    return {problem.data, {}, {}};
  }
  NetworkConfig cfg = opts.net;
  cfg.n_coils = problem.data.coils();
  cfg.rate = problem.rate;
  auto trained = train(problem.calib, cfg, opts.train);
  auto ksp = raki_interpolate_offgrid(problem.data, trained.weights, cfg, problem.offset);
  if (problem.reinsert) {
    ksp = reinsert_lines(ksp, problem.data, problem.acquired);
  }
  return {std::move(ksp), std::move(trained.weights), std::move(trained.report)};
}

namespace {

constexpr char weights_magic[4] = {'R', 'K', 'W', '1'};
constexpr std::size_t weights_header = 4 + 13 * 4 + 8;

template <typename T>
void put(std::vector<char> &out, T v)
{
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get(std::vector<char> const &in, std::size_t &at)
{
  if (at + sizeof(T) > in.size()) {
    throw FormatError("truncated RKW1 file", in.size());
  }
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

} // namespace

void save_weights(RakiWeights const &w, NetworkConfig const &cfg, std::filesystem::path const &path)
{
  cfg.validate();
  check_weights(w, cfg);
  std::vector<char> out(weights_magic, weights_magic + 4);
  for (int v : {cfg.n_coils, cfg.rate, cfg.ky1, cfg.kx1, cfg.channels1, cfg.rate, 1, 1, cfg.channels2, 1, cfg.kx3,
                cfg.out_channels(), cfg.target_gap()}) {
    put(out, std::uint32_t(v));
  }
  put(out, cfg.leaky_slope);
  RakiWeights copy = w;
  for (Cx *v : copy.entries()) {
    put(out, v->real());
    put(out, v->imag());
  }
  write_file(path, out);
}

std::pair<RakiWeights, NetworkConfig> load_weights(std::filesystem::path const &path)
{
  auto const bytes = read_file(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), weights_magic, 4) != 0) {
    throw FormatError("bad magic, expected \"RKW1\"", 0);
  }
  std::size_t at = 4;
  std::uint32_t f[13];
  for (auto &v : f) {
    v = get<std::uint32_t>(bytes, at);
  }
  NetworkConfig cfg;
  cfg.n_coils = int(f[0]);
  cfg.rate = int(f[1]);
  cfg.ky1 = int(f[2]);
  cfg.kx1 = int(f[3]);
  cfg.channels1 = int(f[4]);
  cfg.channels2 = int(f[8]);
  cfg.kx3 = int(f[10]);
  cfg.leaky_slope = get<double>(bytes, at);
  if (f[5] != f[1] || f[6] != 1 || f[7] != 1 || f[9] != 1 || int(f[11]) != cfg.out_channels() ||
      int(f[12]) != cfg.target_gap()) {
    throw FormatError("inconsistent RKW1 network header", 4);
  }
  try {
    cfg.validate();
  } catch (InvalidArgument const &e) {
    throw FormatError(fmt::format("invalid RKW1 network header: {}", e.what()), 4);
  }
  RakiWeights w = RakiWeights::zeros(cfg);
  std::size_t const expected = weights_header + w.real_parameter_count() * 8;
  if (bytes.size() != expected) {
    throw FormatError(fmt::format("RKW1 payload size mismatch, expected {} bytes", expected),
                      std::min(bytes.size(), expected));
  }
  for (Cx *v : w.entries()) {
    double const re = get<double>(bytes, at);
    double const im = get<double>(bytes, at);
    *v = Cx{re, im};
  }
  return {std::move(w), cfg};
}

} // namespace pmri
