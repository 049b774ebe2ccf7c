// Copyright 2026 The Artivae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ARTIVAE_ARVAE_HPP_
#define ARTIVAE_ARVAE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "artivae/features.hpp"
#include "artivae/matrix.hpp"
#include "artivae/rng.hpp"

namespace artivae {

// Encoder hidden sizes; the decoder mirrors them.
inline constexpr std::array<std::size_t, 4> kVaeHidden = {256, 128, 64, 32};
inline constexpr double kLogvarClamp = 15.0;

struct AffineLayer {
  Matrix w;  // out x in
  std::vector<double> b;
};

// All weights of the encoder/decoder pair plus the latent bookkeeping:
// total latent size L and the constrained prefix size N whose entries are
// tied to the articulatory parameters.
struct VaeParams {
  std::size_t input_dim = kNumCepstra;
  std::size_t latent_total = 12;
  std::size_t latent_constrained = 6;

  std::vector<AffineLayer> enc;  // tanh stack
  AffineLayer enc_mu, enc_logvar;
  std::vector<AffineLayer> dec;  // tanh stack
  AffineLayer dec_mu, dec_logvar;

  // Glorot-uniform weights, zero biases, deterministic draw order.
  static VaeParams init(RngStream& rng, std::size_t input_dim,
                        std::span<const std::size_t> hidden,
                        std::size_t latent_total,
                        std::size_t latent_constrained);
  static VaeParams zeros_like(const VaeParams& shape);

  bool all_finite() const;
};

// Flat views of every parameter tensor in a fixed order; shared by the Adam
// update, checkpointing and the finite-difference harness.
std::vector<std::vector<double>*> tensor_list(VaeParams& p);
std::vector<const std::vector<double>*> tensor_list(const VaeParams& p);
std::vector<std::string> tensor_names(const VaeParams& p);

struct LatentPosterior {
  std::vector<double> mu;
  std::vector<double> logvar;  // clamped to [-15, 15]
};

struct DecodeResult {
  std::vector<double> mu;
  std::vector<double> logvar;
};

LatentPosterior encode(const VaeParams& p, std::span<const double> x);
DecodeResult decode(const VaeParams& p, std::span<const double> z);
std::vector<double> reparameterize(const LatentPosterior& post,
                                   std::span<const double> eps);

// KL(q || N(0, I)) in closed form; always >= 0.
double kl_standard_normal(const LatentPosterior& post);
// Diagonal-Gaussian log density of x under (mu, logvar).
double gaussian_loglik(std::span<const double> x, std::span<const double> mu,
                       std::span<const double> logvar);
// || z_{1:N} - a ||^2.
double artic_reg(std::span<const double> z, std::span<const double> a);

// Scratch buffers for one batch pass; reuse across calls to avoid
// re-allocating inside training loops and the finite-difference harness.
struct VaeWorkspace {
  std::vector<Matrix> enc_act;
  Matrix mu_z, logvar_z_raw, logvar_z, z;
  std::vector<Matrix> dec_act;
  Matrix mu_x, logvar_x_raw, logvar_x;
  std::vector<double> frame_loss;
  std::vector<Matrix> scratch;
};

// Batch loss: mean over rows of
//   -loglik(x_target | decode(z)) + KL(q(z|x_in) || N(0,I))
//   + alpha * || z_{1:N} - a ||^2,  z = mu + exp(logvar/2) * eps.
// Throws (with the frame index) if any per-frame loss is non-finite.
double vae_batch_loss(const VaeParams& p, const Matrix& x_in,
                      const Matrix& x_target, const Matrix& a, double alpha,
                      const Matrix& eps, VaeWorkspace& ws);

// Same forward pass plus exact reverse-mode gradients of the batch mean
// with respect to every parameter; gradients flow through the
// reparameterized z into both the decoder path and the regularizer.
double vae_loss_and_grads(const VaeParams& p, const Matrix& x_in,
                          const Matrix& x_target, const Matrix& a,
                          double alpha, const Matrix& eps, VaeWorkspace& ws,
                          VaeParams& grads);

// Convenience wrapper drawing one eps row per frame from `rng`.
double vae_loss_and_grads(const VaeParams& p, const Matrix& x_in,
                          const Matrix& x_target, const Matrix& a,
                          double alpha, RngStream& rng, VaeWorkspace& ws,
                          VaeParams& grads);

struct AdamState {
  VaeParams m, v;
  std::size_t step = 0;
  static AdamState zeros_like(const VaeParams& shape);
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
void adam_step(VaeParams& params, const VaeParams& grads, AdamState& state,
               double learning_rate);

// Per-coefficient affine feature standardization, estimated on training
// frames; constant coefficients keep scale 1.
struct FeatureScaler {
  std::array<double, kNumCepstra> mean{};
  std::array<double, kNumCepstra> scale{};
  static FeatureScaler identity();
};

struct TrainConfig {
  double alpha = 0.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double split_fraction = 0.8;
  bool denoising = false;
};

// The parts of a run that must not depend on alpha: the shuffled 80/20
// split, the initial weights, and the feature scalers. Exposed so paired
// alpha comparisons can be verified to share everything but alpha.
struct TrainPlan {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  VaeParams init;
  FeatureScaler in_scaler;
  FeatureScaler target_scaler;
};
TrainPlan make_train_plan(const TrainConfig& config,
                          const std::vector<ParallelFrame>& data);

struct TrainResult {
  VaeParams params;
  std::vector<double> curve;  // per-epoch test MSE, original units
  FeatureScaler in_scaler;
  FeatureScaler target_scaler;
};

// Deterministic seeded training: shuffled mini-batches of `batch_size`,
// one Monte Carlo sample per frame, Adam updates, and a per-epoch test MSE
// computed through the posterior mean (no sampling).
TrainResult train(const TrainConfig& config,
                  const std::vector<ParallelFrame>& data);

// Mean per-frame reconstruction MSE (original units, divided by 18) over
// `indices`, using the deterministic posterior-mean path.
double eval_test_mse(const VaeParams& p,
                     const std::vector<ParallelFrame>& data,
                     std::span<const std::size_t> indices,
                     const FeatureScaler& in_scaler,
                     const FeatureScaler& target_scaler, bool denoising);

// Checkpoint file (JSON, format "artivae-vae-v1").
struct Checkpoint {
  VaeParams params;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  FeatureScaler in_scaler;
  FeatureScaler target_scaler;
  std::string model_label;  // "vae" when alpha == 0, else "ar-vae"
};
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace artivae

#endif  // ARTIVAE_ARVAE_HPP_
