#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "problem.hpp"
#include "types.hpp"
#include "windows.hpp"

namespace pmri {

/*
 * Three bias-free complex convolution layers:
 *   layer 1: ky1 x kx1, PE dilation = rate, n_coils -> channels1, CLeakyReLU
 *   layer 2: 1 x 1,                         channels1 -> channels2, CLeakyReLU
 *   layer 3: 1 x kx3,                       channels2 -> (rate - 1) * n_coils, identity
 * Output channel (r - 1) * n_coils + c predicts coil c at row anchor + g * rate + r, g = ky1 / 2 - 1.
 */
struct NetworkConfig
{
  int n_coils = 1;
  int rate = 4;
  int ky1 = 2;
  int kx1 = 5;
  int channels1 = 256;
  int channels2 = 128;
  int kx3 = 5;
  double leaky_slope = 0.01;

  int target_gap() const { return ky1 / 2 - 1; }
  int out_channels() const { return (rate - 1) * n_coils; }
  int readout_halo() const { return (kx1 - 1) / 2 + (kx3 - 1) / 2; }
  KernelGeometry layer1_geometry() const { return {ky1, kx1, rate}; }
  void validate() const;
  bool operator==(NetworkConfig const &) const = default;
};

/*
 * Layer weights as (out_ch) x (in_ch * ky * kx) matrices, column (i * ky + j) * kx + t. This is the
 * row-major flattening of an (out_ch, in_ch, ky, kx) array. There are no bias terms.
 */
struct RakiWeights
{
  Eigen::MatrixXcd w1;
  Eigen::MatrixXcd w2;
  Eigen::MatrixXcd w3;

  static RakiWeights zeros(NetworkConfig const &cfg);
  std::size_t real_parameter_count() const { return 2 * std::size_t(w1.size() + w2.size() + w3.size()); }
  bool finite() const { return w1.allFinite() && w2.allFinite() && w3.allFinite(); }
  bool bit_equal(RakiWeights const &o) const;

  // Every complex weight, layer by layer, in storage order.
  std::vector<Cx *> entries();
};

/*
 * Seeded init: every real and imaginary component uniform in [-b, b], b = 1 / sqrt(2 * in_ch * ky * kx).
 * Draw order: w1, w2, w3, each in (out, in, ky, kx) order, real part then imaginary part.
 */
RakiWeights init_weights(NetworkConfig const &cfg, std::uint64_t seed);

// LeakyReLU applied separately to the real and imaginary parts.
inline Cx cleaky_relu(Cx z, double alpha)
{
  auto f = [alpha](double u) { return u >= 0.0 ? u : alpha * u; };
  return {f(z.real()), f(z.imag())};
}

// Output of a valid-only forward pass: values(channel, anchor * cols + x).
struct PredictionGrid
{
  Eigen::MatrixXcd values;
  int anchors = 0;
  int cols = 0;
};

/*
 * Valid-only forward pass over every anchor row a with a + (ky1 - 1) * rate < ny. Column x of the grid
 * corresponds to readout x + readout_halo() of the input.
 */
PredictionGrid forward(MultiCoilKspace const &ksp, RakiWeights const &w, NetworkConfig const &cfg);

// (1 / N) sum |pred - target|^2 over all N complex samples.
double mse_loss(Eigen::MatrixXcd const &pred, Eigen::MatrixXcd const &target);

// Fully sampled block turned into network inputs and regression targets.
struct TrainingSet
{
  Eigen::MatrixXcd patches; // layer-1 im2col, features x (anchor * cols1 + x)
  Eigen::MatrixXcd targets; // out_channels x (anchor * cols + x)
  int anchors = 0;
  int cols1 = 0;
  int cols = 0;
  double scale = 1.0;       // block was divided by this before extraction
};

// Valid windows of a fully sampled block. When normalize is set the block is divided by max |s|.
TrainingSet make_training_set(MultiCoilKspace const &block, NetworkConfig const &cfg, bool normalize = true);

// Targets read from the network's valid output grid over `ksp` (same layout as PredictionGrid).
Eigen::MatrixXcd training_targets(MultiCoilKspace const &ksp, NetworkConfig const &cfg);

struct LossAndGradient
{
  double loss = 0.0;
  RakiWeights grad; // d loss / d Re(w) + i d loss / d Im(w)
};

LossAndGradient gradients(TrainingSet const &set, RakiWeights const &w, NetworkConfig const &cfg);

// Convenience: gradient for an explicit input k-space and target grid (layout of PredictionGrid).
LossAndGradient gradients(MultiCoilKspace const &ksp, Eigen::MatrixXcd const &targets, RakiWeights const &w,
                          NetworkConfig const &cfg);

double evaluate_loss(TrainingSet const &set, RakiWeights const &w, NetworkConfig const &cfg);

// Adam moments tracked per real component; m and v reuse the complex layout (re, im) of the weights.
struct AdamState
{
  long t = 0;
  RakiWeights m;
  RakiWeights v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(RakiWeights const &like);
};

void adam_step(RakiWeights &w, RakiWeights const &grads, AdamState &state, double eta);

struct TrainReport
{
  std::vector<double> loss; // loss before each update
  double initial_loss = 0.0;
  double final_loss = 0.0;  // after the last update
  int steps = 0;
  double scale = 1.0;
};

struct TrainOptions
{
  double eta = 5e-3;
  int steps = 250;
  std::uint64_t seed = 1;
};

struct TrainResult
{
  RakiWeights weights;
  TrainReport report;
};

// Full-batch Adam from a seeded init.
TrainResult train(MultiCoilKspace const &acs_block, NetworkConfig const &cfg, TrainOptions const &opts);

// Continues from `w` with a fresh optimizer state.
TrainReport train_from(RakiWeights &w, TrainingSet const &set, NetworkConfig const &cfg, double eta, int steps);

/*
 * Predicts every off-grid line: anchors on the acquisition grid (periodic phase-encode when ny is a
 * multiple of rate), readout zero extension. Data is divided by max |s| before the pass and multiplied
 * back afterwards. Measured lines in `mask` are restored.
 */
MultiCoilKspace raki_interpolate(MultiCoilKspace const &ksp_zf, RakiWeights const &w, NetworkConfig const &cfg,
                                 SamplingPattern const &pattern);
MultiCoilKspace raki_interpolate_offgrid(MultiCoilKspace const &ksp_zf, RakiWeights const &w, NetworkConfig const &cfg,
                                         int offset);

struct RakiOptions
{
  NetworkConfig net;  // n_coils and rate are taken from the problem
  TrainOptions train;
};

struct RakiRecon
{
  MultiCoilKspace ksp;
  RakiWeights weights;
  TrainReport report;
};

// Train on the calibration block, interpolate, restore measured lines (if problem.reinsert).
RakiRecon raki_reconstruct(ReconProblem const &problem, RakiOptions const &opts);

/*
 * RKW1 checkpoint, little-endian:
 *   "RKW1" | 13 x u32 (n_coils, rate, l1 ky, l1 kx, l1 channels, l1 PE dilation, l2 ky, l2 kx, l2 channels,
 *                      l3 ky, l3 kx, l3 channels, target gap) | f64 leaky slope
 *   | w1, w2, w3 as (f64 re, f64 im) pairs in (out, in, ky, kx) order
 */
void save_weights(RakiWeights const &w, NetworkConfig const &cfg, std::filesystem::path const &path);
std::pair<RakiWeights, NetworkConfig> load_weights(std::filesystem::path const &path);

} // namespace pmri
