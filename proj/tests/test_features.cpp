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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "artivae/features.hpp"
#include "artivae/fft.hpp"
#include "artivae/rng.hpp"
#include "artivae/wav.hpp"

using namespace artivae;

namespace {

AudioSignal sine(double freq_hz, double amplitude, double seconds,
                 std::uint32_t rate = 16000) {
  AudioSignal a;
  a.sample_rate_hz = rate;
  a.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    a.samples[i] = amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate);
  return a;
}

// Band energies computed the slow way: naive windowed DFT per bin plus
// triangle weights evaluated straight from the Traunmueller formula.
std::vector<double> oracle_band_energies(const std::vector<double>& samples,
                                         std::size_t start, std::size_t win,
                                         std::size_t nfft, double rate) {
  std::vector<double> windowed(nfft, 0.0);
  for (std::size_t i = 0; i < win; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win);
    windowed[i] = samples[start + i] * w;
  }
  const std::size_t bins = nfft / 2 + 1;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < nfft; ++n) {
      const double phase = -2.0 * M_PI * k * n / nfft;
      re += windowed[n] * std::cos(phase);
      im += windowed[n] * std::sin(phase);
    }
    power[k] = re * re + im * im;
  }
  auto bark = [](double f) { return 26.81 * f / (1960.0 + f) - 0.53; };
  const double lo = bark(0.0), hi = bark(rate / 2.0);
  const double spacing = (hi - lo) / 19.0;
  std::vector<double> bands(18, 0.0);
  for (std::size_t b = 0; b < 18; ++b) {
    const double center = lo + spacing * (b + 1);
    for (std::size_t k = 0; k < bins; ++k) {
      const double z = bark(k * rate / nfft);
      const double w = 1.0 - std::abs(z - center) / spacing;
      if (w > 0.0) bands[b] += w * power[k];
    }
  }
  return bands;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("bark_cepstrum: silence gives identical frames with floored bands") {
  AudioSignal silence;
  silence.sample_rate_hz = 16000;
  silence.samples.assign(16000, 0.0);
  const auto frames = bark_cepstrum(silence);
  REQUIRE(frames.size() == 99);

  // Every band floors to 1e-10, so each frame is the DCT of a constant.
  std::vector<double> expected_log(18, std::log(1e-10));
  const auto expected = dct_ortho(expected_log);
  for (const auto& f : frames)
    for (std::size_t c = 0; c < kNumCepstra; ++c)
      CHECK(f.coeffs[c] == doctest::Approx(expected[c]).epsilon(1e-12));
}

TEST_CASE("bark_cepstrum: frame count is (len - win) / hop + 1") {
  AudioSignal a;
  a.sample_rate_hz = 16000;
  a.samples.assign(16000, 0.1);
  CHECK(bark_cepstrum(a).size() == 99);

  a.samples.assign(320, 0.1);
  CHECK(bark_cepstrum(a).size() == 1);
  a.samples.assign(319, 0.1);
  CHECK_THROWS(bark_cepstrum(a));

  a.samples.assign(16000, 0.1);
  a.sample_rate_hz = 0;
  CHECK_THROWS(bark_cepstrum(a));
}

TEST_CASE("bark_cepstrum: 1 kHz tone concentrates energy in its band") {
  const AudioSignal tone = sine(1000.0, 0.5, 0.2);
  const BarkAnalyzer an = make_bark_analyzer(16000);
  const auto log_e = log_band_energies(an, tone.samples, 0);

  // Independent oracle for the same frame.
  const auto oracle =
      oracle_band_energies(tone.samples, 0, an.win, an.nfft, 16000.0);
  for (std::size_t b = 0; b < 18; ++b) {
    const double lib = std::exp(log_e[b]);
    CHECK(lib == doctest::Approx(std::max(oracle[b], 1e-10)).epsilon(1e-6));
  }

  std::size_t peak = 0;
  for (std::size_t b = 1; b < 18; ++b)
    if (log_e[b] > log_e[peak]) peak = b;
  for (std::size_t b = 0; b < 18; ++b) {
    if (b + 2 <= peak || b >= peak + 2) {
      const double margin_db =
          10.0 * (log_e[peak] - log_e[b]) / std::log(10.0);
      CHECK(margin_db >= 20.0);
    }
  }
}

TEST_CASE("bark_cepstrum: deterministic") {
  RngStream rng(3);
  AudioSignal a;
  a.sample_rate_hz = 16000;
  a.samples.resize(8000);
  for (auto& s : a.samples) s = 0.2 * rng.normal();
  const auto f1 = bark_cepstrum(a);
  const auto f2 = bark_cepstrum(a);
  REQUIRE(f1.size() == f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i)
    for (std::size_t c = 0; c < kNumCepstra; ++c)
      CHECK(f1[i].coeffs[c] == f2[i].coeffs[c]);
}

TEST_CASE("filterbank: band energy sums match column-weighted spectrum") {
  const BarkAnalyzer an = make_bark_analyzer(16000);
  RngStream rng(5);
  std::vector<double> samples(640);
  for (auto& s : samples) s = 0.3 * rng.normal();

  // Column sums of the filterbank give the per-bin weight actually applied.
  const std::size_t bins = an.nfft / 2 + 1;
  std::vector<double> colsum(bins, 0.0);
  for (std::size_t b = 0; b < kNumCepstra; ++b) {
    double rowsum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      colsum[k] += an.filterbank(b, k);
      rowsum += an.filterbank(b, k);
    }
    CHECK(rowsum > 0.0);
  }
  for (std::size_t k = 0; k < bins; ++k) CHECK(colsum[k] <= 1.0 + 1e-12);

  const auto log_e = log_band_energies(an, samples, 0);
  double total_band = 0.0;
  for (double le : log_e) total_band += std::exp(le);

  // Recompute the weighted spectrum energy directly.
  std::vector<std::complex<double>> buf(an.nfft, 0.0);
  for (std::size_t i = 0; i < an.win; ++i)
    buf[i] = samples[i] * an.window[i];
  fft_inplace(buf, false);
  double weighted = 0.0;
  for (std::size_t k = 0; k < bins; ++k) weighted += colsum[k] * std::norm(buf[k]);

  CHECK(total_band == doctest::Approx(weighted).epsilon(0.01));
}

TEST_CASE("dct: orthonormal round trip") {
  RngStream rng(9);
  std::vector<double> x(18);
  for (auto& v : x) v = rng.normal();
  const auto forward = dct_ortho(x);
  const auto back = idct_ortho(forward);
  for (std::size_t i = 0; i < 18; ++i)
    CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-10));

  // Energy preserved.
  double ex = 0.0, ec = 0.0;
  for (std::size_t i = 0; i < 18; ++i) {
    ex += x[i] * x[i];
    ec += forward[i] * forward[i];
  }
  CHECK(ex == doctest::Approx(ec).epsilon(1e-10));
}

TEST_CASE("mix_at_snr: unit gain at matched RMS and 0 dB") {
  RngStream rng(21);
  AudioSignal clean, noise;
  clean.samples.resize(4000);
  noise.samples.resize(4000);
  for (auto& s : clean.samples) s = 0.1 * rng.normal();
  // Same RMS by construction: copy magnitude pattern with different signs.
  for (std::size_t i = 0; i < 4000; ++i)
    noise.samples[i] = (i % 2 == 0 ? 1.0 : -1.0) * clean.samples[i];

  const AudioSignal mixed = mix_at_snr(clean, noise, 0.0, 0);
  for (std::size_t i = 0; i < 4000; ++i)
    CHECK(mixed.samples[i] ==
          doctest::Approx(clean.samples[i] + noise.samples[i]).epsilon(1e-9));
}

TEST_CASE("mix_at_snr: achieved SNR within 0.01 dB across random signals") {
  RngStream rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    AudioSignal clean, noise;
    clean.samples.resize(3000);
    noise.samples.resize(5000);
    for (auto& s : clean.samples) s = rng.uniform(-0.4, 0.4);
    for (auto& s : noise.samples) s = rng.uniform(-0.2, 0.2);
    const double target = (rep % 3 == 0) ? 0.0 : (rep % 3 == 1 ? 5.0 : 10.0);
    const std::size_t offset = draw_noise_offset(rng, 3000, 5000);
    const AudioSignal mixed = mix_at_snr(clean, noise, target, offset);

    double pc = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < 3000; ++i) {
      pc += clean.samples[i] * clean.samples[i];
      const double added = mixed.samples[i] - clean.samples[i];
      pn += added * added;
    }
    const double achieved = 10.0 * std::log10(pc / pn);
    CHECK(std::abs(achieved - target) < 0.01);
  }
}

TEST_CASE("mix_at_snr: gain equivariance and silence errors") {
  RngStream rng(13);
  AudioSignal clean, noise;
  clean.samples.resize(1000);
  noise.samples.resize(1000);
  for (auto& s : clean.samples) s = 0.1 * rng.normal();
  for (auto& s : noise.samples) s = 0.1 * rng.normal();

  const AudioSignal m1 = mix_at_snr(clean, noise, 10.0, 0);
  AudioSignal clean2 = clean;
  for (auto& s : clean2.samples) s *= 2.0;
  const AudioSignal m2 = mix_at_snr(clean2, noise, 10.0, 0);
  for (std::size_t i = 0; i < 1000; ++i)
    CHECK(m2.samples[i] == doctest::Approx(2.0 * m1.samples[i]).epsilon(1e-9));

  AudioSignal silent;
  silent.samples.assign(1000, 0.0);
  CHECK_THROWS(mix_at_snr(silent, noise, 0.0, 0));
  CHECK_THROWS(mix_at_snr(clean, silent, 0.0, 0));
  AudioSignal short_noise;
  short_noise.samples.assign(10, 0.5);
  CHECK_THROWS(mix_at_snr(clean, short_noise, 0.0, 0));
}

TEST_CASE("align: index pairing with drop counting") {
  std::vector<CepstralFrame> cepstra(99);
  std::vector<ArticulatoryVector> artic(101);
  for (auto& a : artic) a.params.assign(6, 0.0);

  const AlignResult r = align(cepstra, artic);
  CHECK(r.frames.size() == 99);
  CHECK(r.dropped == 2);

  std::vector<CepstralFrame> same(101);
  const AlignResult r2 = align(same, artic);
  CHECK(r2.frames.size() == 101);
  CHECK(r2.dropped == 0);
  CHECK(!r2.frames[0].x_noisy.has_value());

  std::vector<CepstralFrame> noisy(100);
  const AlignResult r3 = align(same, artic, &noisy);
  CHECK(r3.frames.size() == 100);
  CHECK(r3.dropped == 2);
  CHECK(r3.frames[0].x_noisy.has_value());

  CHECK_THROWS(align(std::vector<CepstralFrame>{}, artic));
}

TEST_CASE("wav: 16-bit PCM round trip and unsupported-format errors") {
  RngStream rng(2);
  AudioSignal a;
  a.sample_rate_hz = 16000;
  a.samples.resize(2048);
  for (auto& s : a.samples)
    s = std::floor(rng.uniform(-0.9, 0.9) * 32768.0) / 32768.0;

  const auto path = temp_path("artivae_test_roundtrip.wav");
  write_wav(path.string(), a);
  const AudioSignal b = read_wav(path.string());
  CHECK(b.sample_rate_hz == 16000);
  REQUIRE(b.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(b.samples[i] == a.samples[i]);

  // IEEE float format tag must be rejected.
  {
    auto bytes_path = temp_path("artivae_test_float.wav");
    std::vector<unsigned char> hdr = {
        'R', 'I', 'F', 'F', 36, 0, 0, 0, 'W', 'A', 'V', 'E',
        'f', 'm', 't', ' ', 16, 0, 0, 0,
        3, 0,              // IEEE float
        1, 0,              // mono
        0x80, 0x3e, 0, 0,  // 16000
        0, 0x7d, 0, 0, 2, 0, 16, 0,
        'd', 'a', 't', 'a', 0, 0, 0, 0};
    FILE* f = std::fopen(bytes_path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fwrite(hdr.data(), 1, hdr.size(), f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(read_wav(bytes_path.string()),
                         doctest::Contains("unsupported encoding"),
                         std::runtime_error);
    std::filesystem::remove(bytes_path);
  }
  std::filesystem::remove(path);
}

TEST_CASE("feature files: csv and binary round trips") {
  RngStream rng(6);
  std::vector<CepstralFrame> frames(25);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (auto& c : frames[i].coeffs) c = rng.normal();
    frames[i].time_s = 0.01 * static_cast<double>(i) + 0.01;
  }

  const auto csv = temp_path("artivae_test_feats.csv");
  write_features(csv.string(), frames);
  const auto from_csv = read_features(csv.string());
  REQUIRE(from_csv.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t c = 0; c < kNumCepstra; ++c)
      CHECK(from_csv[i].coeffs[c] == frames[i].coeffs[c]);
    CHECK(from_csv[i].time_s == frames[i].time_s);
  }

  const auto bin = temp_path("artivae_test_feats.feat");
  write_features(bin.string(), frames);
  const auto from_bin = read_features(bin.string());
  REQUIRE(from_bin.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    for (std::size_t c = 0; c < kNumCepstra; ++c)
      CHECK(from_bin[i].coeffs[c] == frames[i].coeffs[c]);

  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}
