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

#include "artivae/arvae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "artivae/version.hpp"

namespace artivae {

namespace {

using nlohmann::json;

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

constexpr std::uint64_t kTagSplit = 0x5347;
constexpr std::uint64_t kTagInit = 0x494e;
constexpr std::uint64_t kTagShuffle = 0x5348;
constexpr std::uint64_t kTagEps = 0x4550;

void affine_forward(const Matrix& x, const AffineLayer& layer, Matrix& out) {
  matmul_nt(x, layer.w, out);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] += layer.b[j];
  }
}

void tanh_inplace(Matrix& m) {
  for (double& v : m.data()) v = std::tanh(v);
}

// d_out is the gradient at the layer output; fills the layer gradient and
// the gradient at the layer input.
void affine_backward(const Matrix& x, const AffineLayer& layer,
                     const Matrix& d_out, AffineLayer& d_layer, Matrix& d_x) {
  matmul_tn(d_out, x, d_layer.w);
  d_layer.b.assign(layer.b.size(), 0.0);
  for (std::size_t i = 0; i < d_out.rows(); ++i) {
    const double* row = d_out.row(i);
    for (std::size_t j = 0; j < d_out.cols(); ++j) d_layer.b[j] += row[j];
  }
  matmul_nn(d_out, layer.w, d_x);
}

// Gradient through tanh given the post-activation values.
void tanh_backward(const Matrix& activated, Matrix& d) {
  for (std::size_t i = 0; i < d.data().size(); ++i)
    d.data()[i] *= 1.0 - activated.data()[i] * activated.data()[i];
}

void clamp_forward(const Matrix& raw, Matrix& clamped) {
  clamped = raw;
  for (double& v : clamped.data())
    v = std::clamp(v, -kLogvarClamp, kLogvarClamp);
}

void clamp_gate(const Matrix& raw, Matrix& d) {
  for (std::size_t i = 0; i < d.data().size(); ++i)
    if (std::abs(raw.data()[i]) >= kLogvarClamp) d.data()[i] = 0.0;
}

AffineLayer init_layer(RngStream& rng, std::size_t out, std::size_t in) {
  AffineLayer layer;
  layer.w = Matrix(out, in);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& v : layer.w.data()) v = rng.uniform(-bound, bound);
  layer.b.assign(out, 0.0);
  return layer;
}

AffineLayer zeros_layer(const AffineLayer& shape) {
  AffineLayer layer;
  layer.w = Matrix(shape.w.rows(), shape.w.cols());
  layer.b.assign(shape.b.size(), 0.0);
  return layer;
}

void check_vector(std::span<const double> v, std::size_t expected,
                  const char* what) {
  if (v.size() != expected)
    throw std::runtime_error(std::string(what) + ": expected length " +
                             std::to_string(expected) + ", got " +
                             std::to_string(v.size()));
  for (double x : v)
    if (!std::isfinite(x))
      throw std::runtime_error(std::string(what) + ": non-finite input");
}

}  // namespace

VaeParams VaeParams::init(RngStream& rng, std::size_t input_dim,
                          std::span<const std::size_t> hidden,
                          std::size_t latent_total,
                          std::size_t latent_constrained) {
  if (latent_constrained >= latent_total)
    throw std::runtime_error("VaeParams: constrained size must be < total");
  VaeParams p;
  p.input_dim = input_dim;
  p.latent_total = latent_total;
  p.latent_constrained = latent_constrained;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    p.enc.push_back(init_layer(rng, h, in));
    in = h;
  }
  p.enc_mu = init_layer(rng, latent_total, in);
  p.enc_logvar = init_layer(rng, latent_total, in);
  in = latent_total;
  for (std::size_t i = hidden.size(); i-- > 0;) {
    p.dec.push_back(init_layer(rng, hidden[i], in));
    in = hidden[i];
  }
  p.dec_mu = init_layer(rng, input_dim, in);
  p.dec_logvar = init_layer(rng, input_dim, in);
  return p;
}

VaeParams VaeParams::zeros_like(const VaeParams& shape) {
  VaeParams p;
  p.input_dim = shape.input_dim;
  p.latent_total = shape.latent_total;
  p.latent_constrained = shape.latent_constrained;
  for (const auto& l : shape.enc) p.enc.push_back(zeros_layer(l));
  p.enc_mu = zeros_layer(shape.enc_mu);
  p.enc_logvar = zeros_layer(shape.enc_logvar);
  for (const auto& l : shape.dec) p.dec.push_back(zeros_layer(l));
  p.dec_mu = zeros_layer(shape.dec_mu);
  p.dec_logvar = zeros_layer(shape.dec_logvar);
  return p;
}

bool VaeParams::all_finite() const {
  for (const auto* t : tensor_list(*this))
    for (double v : *t)
      if (!std::isfinite(v)) return false;
  return true;
}

std::vector<std::vector<double>*> tensor_list(VaeParams& p) {
  std::vector<std::vector<double>*> out;
  auto add = [&](AffineLayer& l) {
    out.push_back(&l.w.data());
    out.push_back(&l.b);
  };
  for (auto& l : p.enc) add(l);
  add(p.enc_mu);
  add(p.enc_logvar);
  for (auto& l : p.dec) add(l);
  add(p.dec_mu);
  add(p.dec_logvar);
  return out;
}

std::vector<const std::vector<double>*> tensor_list(const VaeParams& p) {
  std::vector<const std::vector<double>*> out;
  auto add = [&](const AffineLayer& l) {
    out.push_back(&l.w.data());
    out.push_back(&l.b);
  };
  for (const auto& l : p.enc) add(l);
  add(p.enc_mu);
  add(p.enc_logvar);
  for (const auto& l : p.dec) add(l);
  add(p.dec_mu);
  add(p.dec_logvar);
  return out;
}

std::vector<std::string> tensor_names(const VaeParams& p) {
  std::vector<std::string> out;
  auto add = [&](const std::string& name) {
    out.push_back(name + ".w");
    out.push_back(name + ".b");
  };
  for (std::size_t i = 0; i < p.enc.size(); ++i)
    add("enc" + std::to_string(i));
  add("enc_mu");
  add("enc_logvar");
  for (std::size_t i = 0; i < p.dec.size(); ++i)
    add("dec" + std::to_string(i));
  add("dec_mu");
  add("dec_logvar");
  return out;
}

LatentPosterior encode(const VaeParams& p, std::span<const double> x) {
  check_vector(x, p.input_dim, "encode");
  Matrix h(1, x.size());
  std::copy(x.begin(), x.end(), h.data().begin());
  Matrix next;
  for (const auto& layer : p.enc) {
    affine_forward(h, layer, next);
    tanh_inplace(next);
    std::swap(h, next);
  }
  LatentPosterior post;
  Matrix head;
  affine_forward(h, p.enc_mu, head);
  post.mu.assign(head.data().begin(), head.data().end());
  affine_forward(h, p.enc_logvar, head);
  post.logvar.assign(head.data().begin(), head.data().end());
  for (double& v : post.logvar) v = std::clamp(v, -kLogvarClamp, kLogvarClamp);
  return post;
}

DecodeResult decode(const VaeParams& p, std::span<const double> z) {
  check_vector(z, p.latent_total, "decode");
  Matrix h(1, z.size());
  std::copy(z.begin(), z.end(), h.data().begin());
  Matrix next;
  for (const auto& layer : p.dec) {
    affine_forward(h, layer, next);
    tanh_inplace(next);
    std::swap(h, next);
  }
  DecodeResult out;
  Matrix head;
  affine_forward(h, p.dec_mu, head);
  out.mu.assign(head.data().begin(), head.data().end());
  affine_forward(h, p.dec_logvar, head);
  out.logvar.assign(head.data().begin(), head.data().end());
  for (double& v : out.logvar) v = std::clamp(v, -kLogvarClamp, kLogvarClamp);
  return out;
}

std::vector<double> reparameterize(const LatentPosterior& post,
                                   std::span<const double> eps) {
  if (eps.size() != post.mu.size())
    throw std::runtime_error("reparameterize: eps length mismatch");
  std::vector<double> z(post.mu.size());
  for (std::size_t l = 0; l < z.size(); ++l)
    z[l] = post.mu[l] + std::exp(0.5 * post.logvar[l]) * eps[l];
  return z;
}

double kl_standard_normal(const LatentPosterior& post) {
  double acc = 0.0;
  for (std::size_t l = 0; l < post.mu.size(); ++l)
    acc += std::exp(post.logvar[l]) + post.mu[l] * post.mu[l] - 1.0 -
           post.logvar[l];
  return 0.5 * acc;
}

double gaussian_loglik(std::span<const double> x, std::span<const double> mu,
                       std::span<const double> logvar) {
  double acc = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double r = x[f] - mu[f];
    acc += kLog2Pi + logvar[f] + r * r * std::exp(-logvar[f]);
  }
  return -0.5 * acc;
}

double artic_reg(std::span<const double> z, std::span<const double> a) {
  if (a.size() > z.size())
    throw std::runtime_error("artic_reg: more targets than latent entries");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = z[i] - a[i];
    acc += d * d;
  }
  return acc;
}

namespace {

// Shared forward pass over a batch; fills the workspace. Returns the batch
// mean loss and per-frame losses in ws.frame_loss.
double forward_batch(const VaeParams& p, const Matrix& x_in,
                     const Matrix& x_target, const Matrix& a, double alpha,
                     const Matrix& eps, VaeWorkspace& ws) {
  const std::size_t batch = x_in.rows();
  const std::size_t latent = p.latent_total;
  const std::size_t constrained = p.latent_constrained;

  ws.enc_act.resize(p.enc.size());
  const Matrix* h = &x_in;
  for (std::size_t i = 0; i < p.enc.size(); ++i) {
    affine_forward(*h, p.enc[i], ws.enc_act[i]);
    tanh_inplace(ws.enc_act[i]);
    h = &ws.enc_act[i];
  }
  affine_forward(*h, p.enc_mu, ws.mu_z);
  affine_forward(*h, p.enc_logvar, ws.logvar_z_raw);
  clamp_forward(ws.logvar_z_raw, ws.logvar_z);

  ws.z = ws.mu_z;
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t l = 0; l < latent; ++l)
      ws.z(i, l) += std::exp(0.5 * ws.logvar_z(i, l)) * eps(i, l);

  ws.dec_act.resize(p.dec.size());
  h = &ws.z;
  for (std::size_t i = 0; i < p.dec.size(); ++i) {
    affine_forward(*h, p.dec[i], ws.dec_act[i]);
    tanh_inplace(ws.dec_act[i]);
    h = &ws.dec_act[i];
  }
  affine_forward(*h, p.dec_mu, ws.mu_x);
  affine_forward(*h, p.dec_logvar, ws.logvar_x_raw);
  clamp_forward(ws.logvar_x_raw, ws.logvar_x);

  ws.frame_loss.assign(batch, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double neg_ll = 0.0;
    for (std::size_t f = 0; f < p.input_dim; ++f) {
      const double r = x_target(i, f) - ws.mu_x(i, f);
      neg_ll += kLog2Pi + ws.logvar_x(i, f) +
                r * r * std::exp(-ws.logvar_x(i, f));
    }
    neg_ll *= 0.5;

    double kl = 0.0;
    for (std::size_t l = 0; l < latent; ++l)
      kl += std::exp(ws.logvar_z(i, l)) + ws.mu_z(i, l) * ws.mu_z(i, l) -
            1.0 - ws.logvar_z(i, l);
    kl *= 0.5;

    double reg = 0.0;
    for (std::size_t l = 0; l < constrained; ++l) {
      const double d = ws.z(i, l) - a(i, l);
      reg += d * d;
    }

    const double loss = neg_ll + kl + alpha * reg;
    if (!std::isfinite(loss))
      throw std::runtime_error("vae loss: non-finite loss at batch frame " +
                               std::to_string(i));
    ws.frame_loss[i] = loss;
    total += loss;
  }
  return total / static_cast<double>(batch);
}

}  // namespace

double vae_batch_loss(const VaeParams& p, const Matrix& x_in,
                      const Matrix& x_target, const Matrix& a, double alpha,
                      const Matrix& eps, VaeWorkspace& ws) {
  return forward_batch(p, x_in, x_target, a, alpha, eps, ws);
}

double vae_loss_and_grads(const VaeParams& p, const Matrix& x_in,
                          const Matrix& x_target, const Matrix& a,
                          double alpha, const Matrix& eps, VaeWorkspace& ws,
                          VaeParams& grads) {
  const double loss = forward_batch(p, x_in, x_target, a, alpha, eps, ws);
  const std::size_t batch = x_in.rows();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  ws.scratch.resize(6);
  Matrix& d_mu_x = ws.scratch[0];
  Matrix& d_logvar_x = ws.scratch[1];
  Matrix& d_hidden = ws.scratch[2];
  Matrix& d_next = ws.scratch[3];
  Matrix& d_z = ws.scratch[4];
  Matrix& d_head = ws.scratch[5];

  // Likelihood head gradients.
  d_mu_x = Matrix(batch, p.input_dim);
  d_logvar_x = Matrix(batch, p.input_dim);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t f = 0; f < p.input_dim; ++f) {
      const double r = x_target(i, f) - ws.mu_x(i, f);
      const double inv_var = std::exp(-ws.logvar_x(i, f));
      d_mu_x(i, f) = -inv_batch * r * inv_var;
      d_logvar_x(i, f) = inv_batch * 0.5 * (1.0 - r * r * inv_var);
    }
  }
  clamp_gate(ws.logvar_x_raw, d_logvar_x);

  const Matrix& dec_top = ws.dec_act.back();
  affine_backward(dec_top, p.dec_mu, d_mu_x, grads.dec_mu, d_hidden);
  affine_backward(dec_top, p.dec_logvar, d_logvar_x, grads.dec_logvar, d_next);
  for (std::size_t i = 0; i < d_hidden.data().size(); ++i)
    d_hidden.data()[i] += d_next.data()[i];

  // Decoder stack, top down; inputs are the previous activation (or z).
  for (std::size_t i = p.dec.size(); i-- > 0;) {
    tanh_backward(ws.dec_act[i], d_hidden);
    const Matrix& input = (i == 0) ? ws.z : ws.dec_act[i - 1];
    affine_backward(input, p.dec[i], d_hidden, grads.dec[i], d_next);
    std::swap(d_hidden, d_next);
  }
  std::swap(d_z, d_hidden);

  // Articulatory regularizer contributes directly to dz.
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t l = 0; l < p.latent_constrained; ++l)
      d_z(i, l) += inv_batch * 2.0 * alpha * (ws.z(i, l) - a(i, l));

  // Through the reparameterization into the posterior heads, plus the KL
  // terms which hit mu and logvar directly.
  Matrix& d_mu_z = d_hidden;
  Matrix& d_logvar_z = d_next;
  d_mu_z = d_z;
  d_logvar_z = Matrix(batch, p.latent_total);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t l = 0; l < p.latent_total; ++l) {
      const double sigma = std::exp(0.5 * ws.logvar_z(i, l));
      d_logvar_z(i, l) = d_z(i, l) * 0.5 * sigma * eps(i, l) +
                         inv_batch * 0.5 * (std::exp(ws.logvar_z(i, l)) - 1.0);
      d_mu_z(i, l) += inv_batch * ws.mu_z(i, l);
    }
  }
  clamp_gate(ws.logvar_z_raw, d_logvar_z);

  const Matrix& enc_top = ws.enc_act.back();
  Matrix& d_enc = d_z;
  affine_backward(enc_top, p.enc_mu, d_mu_z, grads.enc_mu, d_enc);
  affine_backward(enc_top, p.enc_logvar, d_logvar_z, grads.enc_logvar, d_head);
  for (std::size_t i = 0; i < d_enc.data().size(); ++i)
    d_enc.data()[i] += d_head.data()[i];

  for (std::size_t i = p.enc.size(); i-- > 0;) {
    tanh_backward(ws.enc_act[i], d_enc);
    const Matrix& input = (i == 0) ? x_in : ws.enc_act[i - 1];
    affine_backward(input, p.enc[i], d_enc, grads.enc[i], d_head);
    std::swap(d_enc, d_head);
  }
  return loss;
}

double vae_loss_and_grads(const VaeParams& p, const Matrix& x_in,
                          const Matrix& x_target, const Matrix& a,
                          double alpha, RngStream& rng, VaeWorkspace& ws,
                          VaeParams& grads) {
  Matrix eps(x_in.rows(), p.latent_total);
  for (std::size_t i = 0; i < eps.rows(); ++i)
    for (std::size_t l = 0; l < eps.cols(); ++l) eps(i, l) = rng.normal();
  return vae_loss_and_grads(p, x_in, x_target, a, alpha, eps, ws, grads);
}

AdamState AdamState::zeros_like(const VaeParams& shape) {
  AdamState s;
  s.m = VaeParams::zeros_like(shape);
  s.v = VaeParams::zeros_like(shape);
  s.step = 0;
  return s;
}

void adam_step(VaeParams& params, const VaeParams& grads, AdamState& state,
               double learning_rate) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++state.step;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));

  auto p_list = tensor_list(params);
  auto g_list = tensor_list(grads);
  auto m_list = tensor_list(state.m);
  auto v_list = tensor_list(state.v);
  for (std::size_t t = 0; t < p_list.size(); ++t) {
    auto& pv = *p_list[t];
    const auto& gv = *g_list[t];
    auto& mv = *m_list[t];
    auto& vv = *v_list[t];
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = kBeta1 * mv[i] + (1.0 - kBeta1) * gv[i];
      vv[i] = kBeta2 * vv[i] + (1.0 - kBeta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / bc1;
      const double v_hat = vv[i] / bc2;
      pv[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
    }
  }
}

FeatureScaler FeatureScaler::identity() {
  FeatureScaler s;
  s.mean.fill(0.0);
  s.scale.fill(1.0);
  return s;
}

namespace {

FeatureScaler fit_scaler(const std::vector<ParallelFrame>& data,
                         std::span<const std::size_t> indices, bool noisy) {
  FeatureScaler s = FeatureScaler::identity();
  const double n = static_cast<double>(indices.size());
  for (std::size_t idx : indices) {
    const auto& c = noisy ? data[idx].x_noisy->coeffs : data[idx].x.coeffs;
    for (std::size_t f = 0; f < kNumCepstra; ++f) s.mean[f] += c[f];
  }
  for (auto& m : s.mean) m /= n;
  std::array<double, kNumCepstra> var{};
  for (std::size_t idx : indices) {
    const auto& c = noisy ? data[idx].x_noisy->coeffs : data[idx].x.coeffs;
    for (std::size_t f = 0; f < kNumCepstra; ++f) {
      const double d = c[f] - s.mean[f];
      var[f] += d * d;
    }
  }
  for (std::size_t f = 0; f < kNumCepstra; ++f) {
    var[f] /= (n - 1.0);
    s.scale[f] = var[f] > 1e-24 ? std::sqrt(var[f]) : 1.0;
  }
  return s;
}

void fill_standardized(const std::vector<ParallelFrame>& data,
                       std::span<const std::size_t> indices, bool noisy,
                       const FeatureScaler& scaler, Matrix& out) {
  out = Matrix(indices.size(), kNumCepstra);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& c =
        noisy ? data[indices[r]].x_noisy->coeffs : data[indices[r]].x.coeffs;
    for (std::size_t f = 0; f < kNumCepstra; ++f)
      out(r, f) = (c[f] - scaler.mean[f]) / scaler.scale[f];
  }
}

}  // namespace

TrainPlan make_train_plan(const TrainConfig& config,
                          const std::vector<ParallelFrame>& data) {
  const std::size_t n = data.size();
  if (n < 10 * config.batch_size)
    throw std::runtime_error("train: need at least " +
                             std::to_string(10 * config.batch_size) +
                             " frames, got " + std::to_string(n));
  if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0))
    throw std::runtime_error("train: split_fraction must be in (0, 1)");
  if (config.batch_size < 1) throw std::runtime_error("train: batch_size < 1");
  if (config.alpha < 0.0) throw std::runtime_error("train: alpha < 0");

  const std::size_t n_params = data[0].a.params.size();
  for (const auto& frame : data) {
    if (frame.a.params.size() != n_params)
      throw std::runtime_error("train: inconsistent articulatory dimension");
    if (config.denoising && !frame.x_noisy.has_value())
      throw std::runtime_error("train: denoising mode needs x_noisy");
  }

  TrainPlan plan;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  RngStream split_rng(mix_seed(config.seed, kTagSplit));
  for (std::size_t i = n; i-- > 1;)
    std::swap(order[i], order[split_rng.below(i + 1)]);
  const auto n_train =
      static_cast<std::size_t>(config.split_fraction * static_cast<double>(n));
  if (n_train == 0 || n_train == n)
    throw std::runtime_error("train: degenerate split");
  plan.train_idx.assign(order.begin(), order.begin() + n_train);
  plan.test_idx.assign(order.begin() + n_train, order.end());

  plan.in_scaler = fit_scaler(data, plan.train_idx, config.denoising);
  plan.target_scaler = config.denoising
                           ? fit_scaler(data, plan.train_idx, false)
                           : plan.in_scaler;

  RngStream init_rng(mix_seed(config.seed, kTagInit));
  plan.init = VaeParams::init(init_rng, kNumCepstra, kVaeHidden,
                              2 * n_params, n_params);
  return plan;
}

double eval_test_mse(const VaeParams& p,
                     const std::vector<ParallelFrame>& data,
                     std::span<const std::size_t> indices,
                     const FeatureScaler& in_scaler,
                     const FeatureScaler& target_scaler, bool denoising) {
  std::vector<double> x_std(kNumCepstra);
  double total = 0.0;
  for (std::size_t idx : indices) {
    const auto& in = denoising ? data[idx].x_noisy->coeffs : data[idx].x.coeffs;
    for (std::size_t f = 0; f < kNumCepstra; ++f)
      x_std[f] = (in[f] - in_scaler.mean[f]) / in_scaler.scale[f];
    const LatentPosterior post = encode(p, x_std);
    const DecodeResult dec = decode(p, post.mu);
    double err = 0.0;
    for (std::size_t f = 0; f < kNumCepstra; ++f) {
      const double rec = dec.mu[f] * target_scaler.scale[f] + target_scaler.mean[f];
      const double d = data[idx].x.coeffs[f] - rec;
      err += d * d;
    }
    total += err / static_cast<double>(kNumCepstra);
  }
  return total / static_cast<double>(indices.size());
}

TrainResult train(const TrainConfig& config,
                  const std::vector<ParallelFrame>& data) {
  TrainPlan plan = make_train_plan(config, data);
  VaeParams params = std::move(plan.init);
  VaeParams grads = VaeParams::zeros_like(params);
  AdamState adam = AdamState::zeros_like(params);
  VaeWorkspace ws;

  RngStream shuffle_rng(mix_seed(config.seed, kTagShuffle));
  RngStream eps_rng(mix_seed(config.seed, kTagEps));

  TrainResult result;
  result.in_scaler = plan.in_scaler;
  result.target_scaler = plan.target_scaler;

  std::vector<std::size_t> train_idx = plan.train_idx;
  std::vector<std::size_t> batch_idx;
  Matrix x_in, x_target, a_mat;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i-- > 1;)
      std::swap(train_idx[i], train_idx[shuffle_rng.below(i + 1)]);

    for (std::size_t start = 0; start < train_idx.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(start + config.batch_size, train_idx.size());
      batch_idx.assign(train_idx.begin() + start, train_idx.begin() + end);

      fill_standardized(data, batch_idx, config.denoising, plan.in_scaler,
                        x_in);
      fill_standardized(data, batch_idx, false, plan.target_scaler, x_target);
      a_mat = Matrix(batch_idx.size(), params.latent_constrained);
      for (std::size_t r = 0; r < batch_idx.size(); ++r)
        for (std::size_t l = 0; l < params.latent_constrained; ++l)
          a_mat(r, l) = data[batch_idx[r]].a.params[l];

      try {
        vae_loss_and_grads(params, x_in, x_target, a_mat, config.alpha,
                           eps_rng, ws, grads);
      } catch (const std::exception& e) {
        throw std::runtime_error(
            "train: aborted at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(start / config.batch_size) + ": " + e.what());
      }
      adam_step(params, grads, adam, config.learning_rate);
      if (!params.all_finite())
        throw std::runtime_error(
            "train: non-finite parameters after epoch " +
            std::to_string(epoch) + ", batch " +
            std::to_string(start / config.batch_size));
    }

    result.curve.push_back(eval_test_mse(params, data, plan.test_idx,
                                         plan.in_scaler, plan.target_scaler,
                                         config.denoising));
  }
  result.params = std::move(params);
  return result;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["format"] = kFormatVae;
  j["model"] = ckpt.model_label;
  j["alpha"] = ckpt.alpha;
  j["seed"] = ckpt.seed;
  j["input_dim"] = ckpt.params.input_dim;
  j["latent_total"] = ckpt.params.latent_total;
  j["latent_constrained"] = ckpt.params.latent_constrained;
  std::vector<std::size_t> hidden;
  for (const auto& l : ckpt.params.enc) hidden.push_back(l.w.rows());
  j["hidden"] = hidden;
  j["in_scaler"] = {{"mean", ckpt.in_scaler.mean},
                    {"scale", ckpt.in_scaler.scale}};
  j["target_scaler"] = {{"mean", ckpt.target_scaler.mean},
                        {"scale", ckpt.target_scaler.scale}};
  json tensors = json::object();
  const auto list = tensor_list(ckpt.params);
  const auto names = tensor_names(ckpt.params);
  for (std::size_t t = 0; t < list.size(); ++t) tensors[names[t]] = *list[t];
  j["tensors"] = std::move(tensors);

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f << j.dump() << "\n";
  if (!f) throw std::runtime_error("save_checkpoint: write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json j;
  f >> j;
  if (j.at("format").get<std::string>() != kFormatVae)
    throw std::runtime_error("load_checkpoint: unexpected format");

  Checkpoint ckpt;
  ckpt.alpha = j.at("alpha").get<double>();
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.model_label = j.at("model").get<std::string>();
  const auto hidden = j.at("hidden").get<std::vector<std::size_t>>();

  RngStream dummy(0);
  ckpt.params = VaeParams::init(
      dummy, j.at("input_dim").get<std::size_t>(), hidden,
      j.at("latent_total").get<std::size_t>(),
      j.at("latent_constrained").get<std::size_t>());
  auto list = tensor_list(ckpt.params);
  const auto names = tensor_names(ckpt.params);
  for (std::size_t t = 0; t < list.size(); ++t) {
    const auto values = j.at("tensors").at(names[t]).get<std::vector<double>>();
    if (values.size() != list[t]->size())
      throw std::runtime_error("load_checkpoint: tensor size mismatch for " +
                               names[t]);
    *list[t] = values;
  }

  const auto read_scaler = [&](const char* key) {
    FeatureScaler s;
    const auto mean = j.at(key).at("mean").get<std::vector<double>>();
    const auto scale = j.at(key).at("scale").get<std::vector<double>>();
    std::copy(mean.begin(), mean.end(), s.mean.begin());
    std::copy(scale.begin(), scale.end(), s.scale.begin());
    return s;
  };
  ckpt.in_scaler = read_scaler("in_scaler");
  ckpt.target_scaler = read_scaler("target_scaler");
  return ckpt;
}

}  // namespace artivae
