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

#include "artivae/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "artivae/articulatory.hpp"
#include "artivae/rng.hpp"
#include "artivae/wav.hpp"

namespace artivae {

namespace {

using nlohmann::json;

void run_jobs(std::size_t n_jobs, const std::function<void(std::size_t)>& job) {
  const std::size_t threads = std::min(experiment_threads(), n_jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n_jobs;
             i = next.fetch_add(1))
          job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw std::runtime_error("emit_report: cannot open " + path);
  f << content;
  if (!f) throw std::runtime_error("emit_report: write failed for " + path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* report_readme_convergence =
    "Convergence experiment outputs\n"
    "==============================\n"
    "\n"
    "curves.csv   alpha,model,seed,epoch,mse - one row per trained epoch;\n"
    "             model is 'vae' for alpha = 0 and 'ar-vae' otherwise.\n"
    "fig_curves.csv  alpha,epoch,mean_mse,fitted_mse - per-alpha mean test\n"
    "             curve and its exponential fit.\n"
    "fig_final.csv   alpha,final_mean_mse,final_std_mse - final-epoch\n"
    "             aggregate per alpha.\n"
    "summary.json aggregates, exponential fit parameters, paired seed\n"
    "             counts, config echo, corpus manifest hash.\n"
    "config.json  the effective configuration of this run.\n";

const char* report_readme_denoising =
    "Denoising experiment outputs\n"
    "============================\n"
    "\n"
    "curves.csv   snr,model,seed,epoch,mse - one row per trained epoch;\n"
    "             snr is 'clean' or the target dB value.\n"
    "fig_denoise.csv  snr,model,final_mean_mse,final_std_mse - final-epoch\n"
    "             aggregate per condition and model.\n"
    "summary.json aggregates, paired seed counts, config echo, corpus\n"
    "             manifest hash.\n"
    "config.json  the effective configuration of this run.\n";

}  // namespace

std::size_t experiment_threads() {
  const char* env = std::getenv("ARTIVAE_THREADS");
  if (env == nullptr) return 1;
  const long parsed = std::strtol(env, nullptr, 10);
  if (parsed < 1) return 1;
  return static_cast<std::size_t>(parsed);
}

std::string snr_label(const std::optional<double>& snr_db) {
  if (!snr_db.has_value()) return "clean";
  std::ostringstream out;
  out << *snr_db;
  return out.str();
}

std::vector<ParallelFrame> corpus_parallel_frames(
    const LoadedCorpus& corpus, std::optional<double> snr_db,
    std::uint64_t mix_seed_base) {
  if (corpus.ema.empty())
    throw std::runtime_error("corpus_parallel_frames: empty corpus");
  if (corpus.features.size() != corpus.ema.size())
    throw std::runtime_error(
        "corpus_parallel_frames: corpus has no feature files");

  std::vector<EmaFrame> all_ema;
  for (const auto& utt : corpus.ema)
    all_ema.insert(all_ema.end(), utt.begin(), utt.end());
  const GuidedPcaModel model = fit_guided_pca(all_ema, corpus.layout);

  AudioSignal babble;
  if (snr_db.has_value()) {
    if (corpus.babble_path.empty())
      throw std::runtime_error(
          "corpus_parallel_frames: corpus has no babble track");
    if (corpus.wav_paths.size() != corpus.ema.size())
      throw std::runtime_error("corpus_parallel_frames: corpus has no audio");
    babble = read_wav(corpus.babble_path);
  }

  std::vector<ParallelFrame> frames;
  for (std::size_t u = 0; u < corpus.ema.size(); ++u) {
    std::vector<ArticulatoryVector> artic(corpus.ema[u].size());
    for (std::size_t t = 0; t < corpus.ema[u].size(); ++t)
      artic[t] = ema_to_artic(model, corpus.ema[u][t]);

    AlignResult aligned;
    if (snr_db.has_value()) {
      const AudioSignal clean = read_wav(corpus.wav_paths[u]);
      RngStream offset_rng(mix_seed(mix_seed_base, u));
      const std::size_t offset = draw_noise_offset(
          offset_rng, clean.samples.size(), babble.samples.size());
      const AudioSignal noisy_audio =
          mix_at_snr(clean, babble, *snr_db, offset);
      const auto noisy = bark_cepstrum(noisy_audio);
      aligned = align(corpus.features[u], artic, &noisy);
    } else {
      aligned = align(corpus.features[u], artic);
    }
    frames.insert(frames.end(), aligned.frames.begin(), aligned.frames.end());
  }
  return frames;
}

ConvergenceReport run_convergence(const LoadedCorpus& corpus,
                                  const ConvergenceConfig& config) {
  if (config.alphas.empty())
    throw std::runtime_error("run_convergence: no alphas given");
  ConvergenceReport report;
  report.config = config;
  report.config.alphas = config.alphas;
  std::sort(report.config.alphas.begin(), report.config.alphas.end());
  report.corpus_hash = corpus.manifest_hash;

  const auto frames = corpus_parallel_frames(corpus, std::nullopt, 0);

  const std::size_t n_alphas = report.config.alphas.size();
  const std::size_t n_seeds = config.n_seeds;
  std::vector<std::vector<std::vector<double>>> curves(
      n_alphas, std::vector<std::vector<double>>(n_seeds));

  run_jobs(n_alphas * n_seeds, [&](std::size_t jid) {
    const std::size_t a = jid / n_seeds;
    const std::size_t s = jid % n_seeds;
    TrainConfig tc;
    tc.alpha = report.config.alphas[a];
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.learning_rate = config.learning_rate;
    tc.seed = config.base_seed + s;
    try {
      curves[a][s] = train(tc, frames).curve;
    } catch (const std::exception& e) {
      throw std::runtime_error("run_convergence: alpha " +
                               std::to_string(tc.alpha) + ", seed " +
                               std::to_string(tc.seed) + ": " + e.what());
    }
  });

  for (std::size_t a = 0; a < n_alphas; ++a) {
    AlphaSummary summary;
    summary.alpha = report.config.alphas[a];
    summary.curves = curves[a];
    summary.mean_curve.assign(config.epochs, 0.0);
    std::vector<double> finals(n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      for (std::size_t e = 0; e < config.epochs; ++e)
        summary.mean_curve[e] += curves[a][s][e];
      finals[s] = curves[a][s].back();
    }
    for (double& v : summary.mean_curve) v /= static_cast<double>(n_seeds);
    summary.final_mean = mean_of(finals);
    summary.final_std = std_of(finals, summary.final_mean);

    if (config.epochs >= 4) {
      std::vector<double> t(config.epochs);
      for (std::size_t e = 0; e < config.epochs; ++e)
        t[e] = static_cast<double>(e);
      summary.fit = fit_exponential_decay(t, summary.mean_curve);
    }
    report.per_alpha.push_back(std::move(summary));
  }

  // Paired comparisons against the alpha = 0 baseline when present.
  const auto baseline =
      std::find_if(report.per_alpha.begin(), report.per_alpha.end(),
                   [](const AlphaSummary& s) { return s.alpha == 0.0; });
  if (baseline != report.per_alpha.end() && report.per_alpha.size() > 1) {
    const std::size_t probe_epoch = std::min<std::size_t>(9, config.epochs - 1);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      double best_probe = std::numeric_limits<double>::infinity();
      double best_final = best_probe;
      for (const auto& summary : report.per_alpha) {
        if (summary.alpha == 0.0) continue;
        best_probe = std::min(best_probe, summary.curves[s][probe_epoch]);
        best_final = std::min(best_final, summary.curves[s].back());
      }
      if (best_probe < baseline->curves[s][probe_epoch])
        ++report.seeds_favoring_regularized_epoch10;
      if (best_final < baseline->curves[s].back())
        ++report.seeds_favoring_regularized_final;
    }
  }
  return report;
}

DenoisingReport run_denoising(const LoadedCorpus& corpus,
                              const DenoisingConfig& config) {
  if (config.snrs.empty())
    throw std::runtime_error("run_denoising: no SNR conditions given");
  DenoisingReport report;
  report.config = config;
  report.corpus_hash = corpus.manifest_hash;
  report.cells.resize(config.snrs.size());
  report.seeds_favoring_regularized.assign(config.snrs.size(), 0);

  const double model_alphas[2] = {0.0, config.regularized_alpha};

  for (std::size_t snr_idx = 0; snr_idx < config.snrs.size(); ++snr_idx) {
    const auto& snr = config.snrs[snr_idx];
    const auto frames =
        corpus_parallel_frames(corpus, snr, config.mix_seed);

    for (auto& cell : report.cells[snr_idx]) {
      cell.curves.assign(config.n_seeds, {});
      cell.finals.assign(config.n_seeds, 0.0);
    }

    run_jobs(2 * config.n_seeds, [&](std::size_t jid) {
      const std::size_t m = jid / config.n_seeds;
      const std::size_t s = jid % config.n_seeds;
      TrainConfig tc;
      tc.alpha = model_alphas[m];
      tc.epochs = config.epochs;
      tc.batch_size = config.batch_size;
      tc.learning_rate = config.learning_rate;
      tc.seed = config.base_seed + s;
      tc.denoising = snr.has_value();
      try {
        const TrainResult result = train(tc, frames);
        report.cells[snr_idx][m].curves[s] = result.curve;
        report.cells[snr_idx][m].finals[s] = result.curve.back();
      } catch (const std::exception& e) {
        throw std::runtime_error("run_denoising: snr " + snr_label(snr) +
                                 ", alpha " + std::to_string(tc.alpha) +
                                 ", seed " + std::to_string(tc.seed) + ": " +
                                 e.what());
      }
    });

    for (auto& cell : report.cells[snr_idx]) {
      cell.final_mean = mean_of(cell.finals);
      cell.final_std = std_of(cell.finals, cell.final_mean);
    }
    for (std::size_t s = 0; s < config.n_seeds; ++s)
      if (report.cells[snr_idx][1].finals[s] <
          report.cells[snr_idx][0].finals[s])
        ++report.seeds_favoring_regularized[snr_idx];
  }
  return report;
}

namespace {

json expfit_to_json(const ExpFit& f) {
  return json{{"offset", f.offset}, {"amplitude", f.amplitude},
              {"rate", f.rate}};
}

json convergence_config_json(const ConvergenceConfig& c) {
  return json{{"alphas", c.alphas},
              {"n_seeds", c.n_seeds},
              {"epochs", c.epochs},
              {"base_seed", c.base_seed},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate}};
}

json denoising_config_json(const DenoisingConfig& c) {
  json snrs = json::array();
  for (const auto& s : c.snrs)
    snrs.push_back(s.has_value() ? json(*s) : json(nullptr));
  return json{{"snrs", snrs},
              {"regularized_alpha", c.regularized_alpha},
              {"n_seeds", c.n_seeds},
              {"epochs", c.epochs},
              {"base_seed", c.base_seed},
              {"mix_seed", c.mix_seed},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate}};
}

}  // namespace

void emit_report(const ConvergenceReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("emit_report: cannot create " + out_dir + ": " +
                             ec.message());

  std::ostringstream curves;
  curves << "alpha,model,seed,epoch,mse\n";
  for (const auto& summary : report.per_alpha) {
    const std::string model = summary.alpha == 0.0 ? "vae" : "ar-vae";
    for (std::size_t s = 0; s < summary.curves.size(); ++s)
      for (std::size_t e = 0; e < summary.curves[s].size(); ++e)
        curves << format_double(summary.alpha) << "," << model << ","
               << report.config.base_seed + s << "," << e << ","
               << format_double(summary.curves[s][e]) << "\n";
  }
  write_text(out_dir + "/curves.csv", curves.str());

  std::ostringstream fig_curves;
  fig_curves << "alpha,epoch,mean_mse,fitted_mse\n";
  for (const auto& summary : report.per_alpha)
    for (std::size_t e = 0; e < summary.mean_curve.size(); ++e)
      fig_curves << format_double(summary.alpha) << "," << e << ","
                 << format_double(summary.mean_curve[e]) << ","
                 << format_double(
                        exp_fit_eval(summary.fit, static_cast<double>(e)))
                 << "\n";
  write_text(out_dir + "/fig_curves.csv", fig_curves.str());

  std::ostringstream fig_final;
  fig_final << "alpha,final_mean_mse,final_std_mse\n";
  for (const auto& summary : report.per_alpha)
    fig_final << format_double(summary.alpha) << ","
              << format_double(summary.final_mean) << ","
              << format_double(summary.final_std) << "\n";
  write_text(out_dir + "/fig_final.csv", fig_final.str());

  json summary_json;
  summary_json["experiment"] = "convergence";
  summary_json["config"] = convergence_config_json(report.config);
  summary_json["corpus_manifest_hash"] = hash_hex(report.corpus_hash);
  summary_json["seeds_favoring_regularized_epoch10"] =
      report.seeds_favoring_regularized_epoch10;
  summary_json["seeds_favoring_regularized_final"] =
      report.seeds_favoring_regularized_final;
  json per_alpha = json::array();
  for (const auto& summary : report.per_alpha) {
    per_alpha.push_back(json{{"alpha", summary.alpha},
                             {"final_mean_mse", summary.final_mean},
                             {"final_std_mse", summary.final_std},
                             {"exp_fit", expfit_to_json(summary.fit)},
                             {"mean_curve", summary.mean_curve}});
  }
  summary_json["per_alpha"] = std::move(per_alpha);
  write_text(out_dir + "/summary.json", summary_json.dump(2) + "\n");

  write_text(out_dir + "/config.json",
             convergence_config_json(report.config).dump(2) + "\n");
  write_text(out_dir + "/README.md", report_readme_convergence);
}

void emit_report(const DenoisingReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("emit_report: cannot create " + out_dir + ": " +
                             ec.message());

  std::ostringstream curves;
  curves << "snr,model,seed,epoch,mse\n";
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const std::string label = snr_label(report.config.snrs[i]);
    for (std::size_t m = 0; m < 2; ++m) {
      const std::string model = m == 0 ? "vae" : "ar-vae";
      const auto& cell = report.cells[i][m];
      for (std::size_t s = 0; s < cell.curves.size(); ++s)
        for (std::size_t e = 0; e < cell.curves[s].size(); ++e)
          curves << label << "," << model << ","
                 << report.config.base_seed + s << "," << e << ","
                 << format_double(cell.curves[s][e]) << "\n";
    }
  }
  write_text(out_dir + "/curves.csv", curves.str());

  std::ostringstream fig;
  fig << "snr,model,final_mean_mse,final_std_mse\n";
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const std::string label = snr_label(report.config.snrs[i]);
    for (std::size_t m = 0; m < 2; ++m)
      fig << label << "," << (m == 0 ? "vae" : "ar-vae") << ","
          << format_double(report.cells[i][m].final_mean) << ","
          << format_double(report.cells[i][m].final_std) << "\n";
  }
  write_text(out_dir + "/fig_denoise.csv", fig.str());

  json summary_json;
  summary_json["experiment"] = "denoising";
  summary_json["config"] = denoising_config_json(report.config);
  summary_json["corpus_manifest_hash"] = hash_hex(report.corpus_hash);
  json conditions = json::array();
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    json cell_json;
    cell_json["snr"] = snr_label(report.config.snrs[i]);
    cell_json["seeds_favoring_regularized"] =
        report.seeds_favoring_regularized[i];
    for (std::size_t m = 0; m < 2; ++m) {
      const char* key = m == 0 ? "vae" : "ar-vae";
      cell_json[key] = json{{"final_mean_mse", report.cells[i][m].final_mean},
                            {"final_std_mse", report.cells[i][m].final_std},
                            {"finals", report.cells[i][m].finals}};
    }
    conditions.push_back(std::move(cell_json));
  }
  summary_json["conditions"] = std::move(conditions);
  write_text(out_dir + "/summary.json", summary_json.dump(2) + "\n");

  write_text(out_dir + "/config.json",
             denoising_config_json(report.config).dump(2) + "\n");
  write_text(out_dir + "/README.md", report_readme_denoising);
}

}  // namespace artivae
