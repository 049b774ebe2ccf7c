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

#include "artivae/synthcorpus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "artivae/fft.hpp"
#include "artivae/version.hpp"
#include "artivae/wav.hpp"

namespace artivae {

namespace {

using nlohmann::json;

// Sub-stream tags; fixed so corpora are reproducible function of the seed.
constexpr std::uint64_t kTagTruth = 0x11;
constexpr std::uint64_t kTagTrajectory = 0x22;
constexpr std::uint64_t kTagEmaNoise = 0x33;
constexpr std::uint64_t kTagCepstraNoise = 0x44;
constexpr std::uint64_t kTagAudioPhase = 0x55;
constexpr std::uint64_t kTagBabble = 0x66;

constexpr double kFrameDt = 0.01;       // 100 Hz
constexpr std::size_t kTargetHold = 15; // new target every 150 ms
constexpr double kOmega = 40.0;         // critically damped response, 1/s
constexpr double kAudioPeak = 0.3;

// One critically damped second-order trajectory through random targets.
void damped_response(RngStream& rng, std::size_t frames, double* out) {
  double target = rng.uniform(-1.5, 1.5);
  double x = target, v = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (t > 0 && t % kTargetHold == 0) target = rng.uniform(-1.5, 1.5);
    v += kFrameDt * (kOmega * kOmega * (target - x) - 2.0 * kOmega * v);
    x += kFrameDt * v;
    out[t] = x;
  }
}

void standardize_columns(std::vector<Matrix>& per_utterance) {
  if (per_utterance.empty()) return;
  const std::size_t dims = per_utterance.front().cols();
  std::size_t total = 0;
  std::vector<double> mean(dims, 0.0), var(dims, 0.0);
  for (const auto& m : per_utterance) {
    total += m.rows();
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < dims; ++j) mean[j] += m(i, j);
  }
  for (auto& v : mean) v /= static_cast<double>(total);
  for (const auto& m : per_utterance)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < dims; ++j) {
        const double d = m(i, j) - mean[j];
        var[j] += d * d;
      }
  for (auto& v : var) v /= static_cast<double>(total - 1);
  for (auto& m : per_utterance)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < dims; ++j)
        m(i, j) = (m(i, j) - mean[j]) / std::sqrt(var[j]);
}

// Adjusts `v` by a combination of the constraint directions so that
// v . constraint[i] == target[i] exactly; used to orthogonalize the mixing
// columns without disturbing their support pattern.
std::vector<double> meet_dot_constraints(
    std::vector<double> v, const std::vector<std::vector<double>>& constraints,
    const std::vector<double>& targets) {
  const std::size_t k = constraints.size();
  if (k == 0) return v;
  Matrix gram(k, k);
  std::vector<double> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      gram(i, j) = dot(constraints[i], constraints[j]);
    rhs[i] = targets[i] - dot(constraints[i], v);
  }
  const auto coef = solve_linear(gram, rhs);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t d = 0; d < v.size(); ++d) v[d] += coef[i] * constraints[i][d];
  return v;
}

void put_block(Matrix& m, std::size_t col, std::size_t first,
               const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) m(first + i, col) = values[i];
}

std::vector<double> get_block(const Matrix& m, std::size_t col,
                              std::size_t first, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = m(first + i, col);
  return out;
}

}  // namespace

Trajectories gen_trajectories(const SynthConfig& config) {
  if (config.n_params != 6 && config.n_params != 7)
    throw std::runtime_error("gen_trajectories: n_params must be 6 or 7");
  if (config.n_utterances == 0 || config.frames_per_utterance == 0)
    throw std::runtime_error("gen_trajectories: empty corpus config");

  Trajectories out;
  out.a.resize(config.n_utterances);
  out.source.resize(config.n_utterances);
  for (std::size_t u = 0; u < config.n_utterances; ++u) {
    RngStream rng(mix_seed(config.seed, kTagTrajectory ^ (u << 8)));
    out.a[u] = Matrix(config.frames_per_utterance, config.n_params);
    out.source[u] = Matrix(config.frames_per_utterance, config.source_dims);
    std::vector<double> track(config.frames_per_utterance);
    for (std::size_t p = 0; p < config.n_params; ++p) {
      damped_response(rng, config.frames_per_utterance, track.data());
      for (std::size_t t = 0; t < track.size(); ++t) out.a[u](t, p) = track[t];
    }
    for (std::size_t s = 0; s < config.source_dims; ++s) {
      damped_response(rng, config.frames_per_utterance, track.data());
      for (std::size_t t = 0; t < track.size(); ++t)
        out.source[u](t, s) = track[t];
    }
  }
  standardize_columns(out.a);
  standardize_columns(out.source);
  return out;
}

GroundTruth make_ground_truth(const SynthConfig& config) {
  const CoilLayout layout = CoilLayout::standard(config.n_params == 7);
  const std::size_t dims = layout.dims();
  GroundTruth truth;
  truth.ema_mean = {0.2, -8.0, 3.2, -1.5, 1.8, 0.5, 0.2,
                    1.0, 4.0, 0.8,  3.9, -0.9};
  if (layout.has_velum) {
    truth.ema_mean.push_back(-2.0);
    truth.ema_mean.push_back(2.5);
  }

  // Mixing columns are built with the support pattern the guided-PCA stages
  // assume (only the jaw parameter touches the jaw coil; tongue parameters
  // stay on tongue coils; lip parameters split protrusion/aperture axes) and
  // are then adjusted to be exactly pairwise orthogonal. Tongue-tip
  // contributions of JH/TB/TD share one direction so the tip parameter can
  // occupy the perpendicular one.
  Matrix m(dims, config.n_params);
  const std::vector<double> tip_dir{0.8, 0.6};
  const std::vector<double> tip_perp{-0.6, 0.8};

  auto scaled = [](const std::vector<double>& v, double s) {
    std::vector<double> out = v;
    for (double& x : out) x *= s;
    return out;
  };

  // JH: jaw plus its carry-over onto tongue and lips.
  put_block(m, 0, CoilLayout::kJaw, {0.8, 1.5});
  put_block(m, 0, CoilLayout::kTongueTip, scaled(tip_dir, 0.45));
  put_block(m, 0, CoilLayout::kTongueBlade, {0.5, 1.0});
  put_block(m, 0, CoilLayout::kTongueDorsum, {0.4, 1.2});
  put_block(m, 0, CoilLayout::kUpperLip, {0.1, 0.4});
  put_block(m, 0, CoilLayout::kLowerLip, {0.2, 0.9});

  const std::vector<double> jh_bd = {0.5, 1.0, 0.4, 1.2};

  // TB: blade+dorsum dominant, small tip carry-over along the shared
  // direction; orthogonal to JH.
  {
    const double tip_gain = 0.3;
    std::vector<double> bd =
        meet_dot_constraints({1.8, -0.75, 1.2, -0.9}, {jh_bd},
                             {-tip_gain * 0.45});
    put_block(m, 1, CoilLayout::kTongueTip, scaled(tip_dir, tip_gain));
    put_block(m, 1, CoilLayout::kTongueBlade, {bd[0], bd[1]});
    put_block(m, 1, CoilLayout::kTongueDorsum, {bd[2], bd[3]});
  }

  // TD: same support, orthogonal to both JH and TB, smaller blade+dorsum
  // norm so the stage PCA separates the two cleanly.
  {
    const double tip_gain = 0.2;
    const std::vector<double> tb_bd = {m(CoilLayout::kTongueBlade, 1),
                                       m(CoilLayout::kTongueBlade + 1, 1),
                                       m(CoilLayout::kTongueDorsum, 1),
                                       m(CoilLayout::kTongueDorsum + 1, 1)};
    std::vector<double> bd = meet_dot_constraints(
        {0.3, 0.55, -0.5, 0.25}, {jh_bd, tb_bd},
        {-tip_gain * 0.45, -tip_gain * 0.3});
    put_block(m, 2, CoilLayout::kTongueTip, scaled(tip_dir, tip_gain));
    put_block(m, 2, CoilLayout::kTongueBlade, {bd[0], bd[1]});
    put_block(m, 2, CoilLayout::kTongueDorsum, {bd[2], bd[3]});
  }

  // TT: tongue tip only, perpendicular to the shared carry-over direction.
  put_block(m, 3, CoilLayout::kTongueTip, scaled(tip_perp, 1.1));

  // LP: protrusion axis (x of both lips), orthogonal to JH's lip-x part.
  {
    std::vector<double> px = meet_dot_constraints({1.3, -0.4}, {{0.1, 0.2}}, {0.0});
    m(CoilLayout::kUpperLip, 4) = px[0];
    m(CoilLayout::kLowerLip, 4) = px[1];
  }

  // LH: aperture axis (y of both lips), orthogonal to JH's lip-y part.
  {
    std::vector<double> py = meet_dot_constraints({0.9, -0.7}, {{0.4, 0.9}}, {0.0});
    m(CoilLayout::kUpperLip + 1, 5) = py[0];
    m(CoilLayout::kLowerLip + 1, 5) = py[1];
  }

  if (config.n_params == 7)
    put_block(m, 6, CoilLayout::kVelum, {0.7, 1.1});

  truth.ema_mixing = m;

  // Spectral map: fixed random single-hidden-layer net. The hidden gain is
  // the nonlinearity knob; the output bias centers log band energies near
  // exp(-1) so the synthesized audio has a sane dynamic range.
  RngStream rng(mix_seed(config.seed, kTagTruth));
  const std::size_t in_dim = config.n_params + config.source_dims;
  truth.spectral.w_hidden = Matrix(64, in_dim);
  for (double& v : truth.spectral.w_hidden.data())
    v = config.nonlinearity_scale * rng.normal() / std::sqrt(double(in_dim));
  truth.spectral.b_hidden.resize(64);
  for (double& v : truth.spectral.b_hidden) v = 0.2 * rng.normal();
  // High-order cepstra are damped so the synthesized envelopes stay smooth
  // at the scale of one filterbank band, as real spectra are; the first
  // coefficients keep full strength.
  truth.spectral.w_out = Matrix(kNumCepstra, 64);
  for (std::size_t c = 0; c < kNumCepstra; ++c) {
    const double rolloff = c > 8 ? std::exp(-0.35 * static_cast<double>(c - 8)) : 1.0;
    const double scale = 2.2 * rolloff;
    for (std::size_t h = 0; h < 64; ++h)
      truth.spectral.w_out(c, h) = scale * rng.normal() / std::sqrt(64.0);
  }
  truth.spectral.b_out.resize(kNumCepstra);
  for (double& v : truth.spectral.b_out) v = 0.3 * rng.normal();
  truth.spectral.b_out[0] -= std::sqrt(double(kNumCepstra));  // log-energy baseline
  return truth;
}

std::vector<EmaFrame> gen_ema(const GroundTruth& truth, const Matrix& a_true,
                              double noise_sigma, RngStream& rng) {
  const std::size_t dims = truth.ema_mixing.rows();
  std::vector<EmaFrame> frames(a_true.rows());
  for (std::size_t t = 0; t < a_true.rows(); ++t) {
    frames[t].coords.assign(truth.ema_mean.begin(), truth.ema_mean.end());
    for (std::size_t d = 0; d < dims; ++d) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a_true.cols(); ++p)
        acc += truth.ema_mixing(d, p) * a_true(t, p);
      frames[t].coords[d] += acc + noise_sigma * rng.normal();
    }
    frames[t].time_s = kFrameDt * static_cast<double>(t) + kFrameDt;
  }
  return frames;
}

std::vector<CepstralFrame> gen_cepstra(const GroundTruth& truth,
                                       const Matrix& a_true,
                                       const Matrix& source,
                                       double noise_sigma, RngStream& rng) {
  const std::size_t frames = a_true.rows();
  const std::size_t in_dim = a_true.cols() + source.cols();
  std::vector<CepstralFrame> out(frames);
  std::vector<double> in(in_dim), hidden(64);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t p = 0; p < a_true.cols(); ++p) in[p] = a_true(t, p);
    for (std::size_t s = 0; s < source.cols(); ++s)
      in[a_true.cols() + s] = source(t, s);
    for (std::size_t h = 0; h < 64; ++h)
      hidden[h] = std::tanh(dot(truth.spectral.w_hidden.row_span(h), in) +
                            truth.spectral.b_hidden[h]);
    for (std::size_t c = 0; c < kNumCepstra; ++c)
      out[t].coeffs[c] = dot(truth.spectral.w_out.row_span(c), hidden) +
                         truth.spectral.b_out[c] + noise_sigma * rng.normal();
    out[t].time_s = kFrameDt * static_cast<double>(t) + kFrameDt;
  }
  return out;
}

namespace {

void quantize_to_pcm_grid(AudioSignal& audio) {
  for (double& s : audio.samples) {
    double q = std::lrint(s * 32768.0);
    q = std::clamp(q, -32768.0, 32767.0);
    s = q / 32768.0;
  }
}

}  // namespace

AudioSignal synthesize_audio(const std::vector<CepstralFrame>& cepstra,
                             std::uint32_t sample_rate_hz, RngStream& rng) {
  if (cepstra.empty())
    throw std::runtime_error("synthesize_audio: no frames");
  const BarkAnalyzer an = make_bark_analyzer(sample_rate_hz);
  AudioSignal audio;
  audio.sample_rate_hz = sample_rate_hz;
  audio.samples.assign((cepstra.size() - 1) * an.hop + an.win + an.hop, 0.0);

  const std::size_t bins = an.nfft / 2 + 1;
  // One random phase per bin, advanced by the hop rotation every frame, so
  // overlapping grains stay coherent and the overlap-add reconstructs the
  // per-frame envelopes instead of interfering with them.
  std::vector<double> phase(bins);
  for (std::size_t k = 1; k + 1 < bins; ++k)
    phase[k] = rng.uniform(0.0, 2.0 * M_PI);
  const double advance = 2.0 * M_PI * static_cast<double>(an.hop) /
                         static_cast<double>(an.nfft);

  // Tones sit on every third bin so their analysis-window mainlobes do not
  // overlap; each carries three bins' worth of energy. Dense unit-magnitude
  // spectra would beat against each other within the 20 ms window and bury
  // the envelope under interference noise.
  constexpr std::size_t kToneStride = 3;
  const double tone_gain = std::sqrt(static_cast<double>(kToneStride));

  std::vector<std::complex<double>> spec(an.nfft);
  for (std::size_t f = 0; f < cepstra.size(); ++f) {
    const auto env = spectral_envelope(an, cepstra[f].coeffs);
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t k = kToneStride; k + 1 < bins; k += kToneStride) {
      const double rotated =
          phase[k] + advance * static_cast<double>(k * f);
      spec[k] = std::polar(tone_gain * env[k], rotated);
      spec[an.nfft - k] = std::conj(spec[k]);
    }
    fft_inplace(spec, true);
    const std::size_t start = f * an.hop;
    for (std::size_t i = 0; i < an.win; ++i)
      audio.samples[start + i] += spec[i].real() * an.window[i];
  }
  audio.samples.resize((cepstra.size() - 1) * an.hop + an.win);

  double peak = 0.0;
  for (double s : audio.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double& s : audio.samples) s *= kAudioPeak / peak;
  quantize_to_pcm_grid(audio);
  return audio;
}

AudioSignal gen_babble(const SynthConfig& config, std::size_t min_samples) {
  AudioSignal babble;
  babble.sample_rate_hz = 16000;
  const BarkAnalyzer an = make_bark_analyzer(babble.sample_rate_hz);
  const std::size_t frames_needed =
      (min_samples + an.hop - 1) / an.hop + 2;

  for (int track = 0; track < 6; ++track) {
    SynthConfig track_config = config;
    track_config.seed = mix_seed(config.seed, kTagBabble ^ (std::uint64_t(track) << 16));
    track_config.n_utterances = 1;
    track_config.frames_per_utterance = frames_needed;
    track_config.with_audio = false;

    const Trajectories traj = gen_trajectories(track_config);
    const GroundTruth truth = make_ground_truth(track_config);
    RngStream noise_rng(mix_seed(track_config.seed, kTagCepstraNoise));
    const auto cepstra =
        gen_cepstra(truth, traj.a[0], traj.source[0],
                    config.cepstra_noise_sigma, noise_rng);
    RngStream phase_rng(mix_seed(track_config.seed, kTagAudioPhase));
    const AudioSignal voice =
        synthesize_audio(cepstra, babble.sample_rate_hz, phase_rng);
    if (babble.samples.empty()) babble.samples.assign(voice.samples.size(), 0.0);
    const std::size_t n = std::min(babble.samples.size(), voice.samples.size());
    for (std::size_t i = 0; i < n; ++i) babble.samples[i] += voice.samples[i];
  }

  double power = 0.0;
  for (double s : babble.samples) power += s * s;
  const double rms = std::sqrt(power / static_cast<double>(babble.samples.size()));
  if (rms <= 0.0) throw std::runtime_error("gen_babble: silent babble");
  for (double& s : babble.samples) s /= rms;
  return babble;
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  SynthCorpus corpus;
  corpus.config = config;
  corpus.layout = CoilLayout::standard(config.n_params == 7);
  corpus.truth = make_ground_truth(config);

  const Trajectories traj = gen_trajectories(config);
  corpus.utterances.resize(config.n_utterances);
  for (std::size_t u = 0; u < config.n_utterances; ++u) {
    SynthUtterance& utt = corpus.utterances[u];
    utt.a_true = traj.a[u];
    utt.source = traj.source[u];

    RngStream ema_rng(mix_seed(config.seed, kTagEmaNoise ^ (u << 8)));
    utt.ema = gen_ema(corpus.truth, utt.a_true, config.coil_noise_sigma, ema_rng);

    RngStream ceps_rng(mix_seed(config.seed, kTagCepstraNoise ^ (u << 8)));
    utt.cepstra_gen = gen_cepstra(corpus.truth, utt.a_true, utt.source,
                                  config.cepstra_noise_sigma, ceps_rng);

    if (config.with_audio) {
      RngStream phase_rng(mix_seed(config.seed, kTagAudioPhase ^ (u << 8)));
      utt.audio = synthesize_audio(utt.cepstra_gen, 16000, phase_rng);
      utt.features = bark_cepstrum(utt.audio);
    }
  }

  if (config.with_audio) {
    std::size_t longest = 0;
    for (const auto& utt : corpus.utterances)
      longest = std::max(longest, utt.audio.samples.size());
    corpus.babble = gen_babble(config, longest + longest / 2);
  }
  return corpus;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string write_corpus(const SynthCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  json manifest;
  manifest["format"] = "artivae-corpus-v1";
  manifest["seed"] = corpus.config.seed;
  manifest["config"] = {
      {"n_utterances", corpus.config.n_utterances},
      {"frames_per_utterance", corpus.config.frames_per_utterance},
      {"n_params", corpus.config.n_params},
      {"source_dims", corpus.config.source_dims},
      {"nonlinearity_scale", corpus.config.nonlinearity_scale},
      {"coil_noise_sigma", corpus.config.coil_noise_sigma},
      {"cepstra_noise_sigma", corpus.config.cepstra_noise_sigma},
      {"with_audio", corpus.config.with_audio},
  };
  manifest["layout"] = {{"has_velum", corpus.layout.has_velum}};
  manifest["ground_truth"] = {
      {"ema_mixing", {{"rows", corpus.truth.ema_mixing.rows()},
                      {"cols", corpus.truth.ema_mixing.cols()},
                      {"data", corpus.truth.ema_mixing.data()}}},
      {"ema_mean", corpus.truth.ema_mean},
  };

  const auto param_names = corpus.layout.param_names();
  json utt_list = json::array();
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    const SynthUtterance& utt = corpus.utterances[u];
    std::ostringstream id;
    id << "utt" << std::setw(4) << std::setfill('0') << u;
    const std::string base = id.str();

    const std::string ema_path = base + "_ema.csv";
    write_ema_csv(dir + "/" + ema_path, utt.ema, corpus.layout);

    const std::string truth_path = base + "_a_true.csv";
    {
      std::ofstream f(dir + "/" + truth_path, std::ios::trunc);
      if (!f) throw std::runtime_error("write_corpus: cannot open " + truth_path);
      for (std::size_t p = 0; p < param_names.size(); ++p)
        f << (p ? "," : "") << param_names[p];
      f << "\n";
      char buf[32];
      for (std::size_t t = 0; t < utt.a_true.rows(); ++t) {
        for (std::size_t p = 0; p < utt.a_true.cols(); ++p) {
          std::snprintf(buf, sizeof buf, "%.17g", utt.a_true(t, p));
          f << (p ? "," : "") << buf;
        }
        f << "\n";
      }
    }

    json entry = {
        {"id", base}, {"ema", ema_path}, {"a_true", truth_path}};
    if (corpus.config.with_audio) {
      const std::string wav_path = base + ".wav";
      const std::string feat_path = base + ".feat";
      write_wav(dir + "/" + wav_path, utt.audio);
      write_features(dir + "/" + feat_path, utt.features);
      entry["wav"] = wav_path;
      entry["features"] = feat_path;
    }
    utt_list.push_back(entry);
  }
  manifest["utterances"] = utt_list;
  if (corpus.config.with_audio) {
    write_wav(dir + "/babble.wav", corpus.babble);
    manifest["babble"] = "babble.wav";
  }

  const std::string manifest_path = dir + "/manifest.json";
  std::ofstream f(manifest_path, std::ios::trunc);
  if (!f) throw std::runtime_error("write_corpus: cannot open " + manifest_path);
  f << manifest.dump(2) << "\n";
  if (!f) throw std::runtime_error("write_corpus: manifest write failed");
  return manifest_path;
}

LoadedCorpus load_corpus(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  std::ifstream f(manifest_path);
  if (!f) throw std::runtime_error("load_corpus: cannot open " + manifest_path);
  std::stringstream buffer;
  buffer << f.rdbuf();
  const std::string bytes = buffer.str();

  json manifest = json::parse(bytes);
  if (manifest.at("format").get<std::string>() != "artivae-corpus-v1")
    throw std::runtime_error("load_corpus: unexpected manifest format");

  LoadedCorpus corpus;
  corpus.manifest_hash = fnv1a64(bytes);
  corpus.seed = manifest.at("seed").get<std::uint64_t>();
  corpus.layout.has_velum = manifest.at("layout").at("has_velum").get<bool>();
  for (const auto& entry : manifest.at("utterances")) {
    const auto ema = read_ema_csv(dir + "/" + entry.at("ema").get<std::string>());
    if (ema.layout.has_velum != corpus.layout.has_velum)
      throw std::runtime_error("load_corpus: layout mismatch in utterance files");
    corpus.ema.push_back(ema.frames);
    if (entry.contains("features"))
      corpus.features.push_back(
          read_features(dir + "/" + entry.at("features").get<std::string>()));
    if (entry.contains("wav"))
      corpus.wav_paths.push_back(dir + "/" + entry.at("wav").get<std::string>());
  }
  corpus.n_utterances = corpus.ema.size();
  if (manifest.contains("babble"))
    corpus.babble_path = dir + "/" + manifest.at("babble").get<std::string>();
  return corpus;
}

}  // namespace artivae
