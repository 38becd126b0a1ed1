// tools/src/app.cpp

// Copyright 2026  The npads Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "npads_app/app.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "npads/audio.hpp"
#include "npads/detector.hpp"
#include "npads/error.hpp"
#include "npads/feature_cache.hpp"
#include "npads/metrics.hpp"
#include "npads/model.hpp"
#include "npads/sampler.hpp"
#include "npads/trainer.hpp"
#include "npads/wav.hpp"

namespace fs = std::filesystem;

namespace npads::app {

namespace {

constexpr const char* kUsage =
    "usage: npads <command> [options]\n"
    "\n"
    "commands:\n"
    "  features   extract log-mel features from WAV files into a cache\n"
    "  train      train a detector (AE, NP or AUC mode) on feature caches\n"
    "  simulate   draw simulated anomalous feature vectors from a model\n"
    "  detect     score WAV files and emit per-clip verdicts\n"
    "  eval       build a mixed test set and report AUC, pAUC and rho-TPR\n"
    "\n"
    "Every command accepts --config FILE with key=value lines; flags on the\n"
    "command line override values from the file. Run 'npads <command> --help'\n"
    "for the options of one command.\n";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool has_wav_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

// A single file, or every .wav below a directory sorted by path.
std::vector<fs::path> list_wavs(const fs::path& input) {
  if (fs::is_regular_file(input)) return {input};
  if (!fs::is_directory(input)) throw DataError("no such file or directory: " + input.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(input))
    if (e.is_regular_file() && has_wav_extension(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no input files in " + input.string());
  return files;
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("no such file or directory: " + p.string());
}

struct FeatureOptions {
  FeatureConfig cfg;
  std::string window = "hann";

  void add_to(CLI::App& app) {
    app.add_option("--frame-len,--frame_len", cfg.frame_len, "STFT frame length (power of two)")
        ->capture_default_str();
    app.add_option("--hop", cfg.hop, "STFT hop in samples")->capture_default_str();
    app.add_option("--n-mels,--n_mels", cfg.n_mels, "mel bands")->capture_default_str();
    app.add_option("--context", cfg.context, "context frames on each side")->capture_default_str();
    app.add_option("--eps-floor,--eps_floor", cfg.eps_floor, "floor inside the log")->capture_default_str();
    app.add_option("--window", window, "analysis window")
        ->check(CLI::IsMember({"hann", "rect"}))
        ->capture_default_str();
  }

  FeatureConfig resolve() {
    cfg.window = window == "rect" ? Window::Rectangular : Window::Hann;
    cfg.validate();
    return cfg;
  }
};

std::string feature_text(const FeatureConfig& f) {
  std::ostringstream s;
  s << "frame_len=" << f.frame_len << '\n'
    << "hop=" << f.hop << '\n'
    << "n_mels=" << f.n_mels << '\n'
    << "context=" << f.context << '\n'
    << "eps_floor=" << fmt(f.eps_floor) << '\n'
    << "window=" << (f.window == Window::Hann ? "hann" : "rect") << '\n';
  return s.str();
}

struct TrainOptions {
  TrainConfig cfg;
  std::string mode = "NP";

  void add_to(CLI::App& app) {
    app.add_option("--mode", mode, "training objective")
        ->check(CLI::IsMember({"AE", "NP", "AUC"}))
        ->capture_default_str();
    app.add_option("--rho", cfg.rho, "FPR target of the training threshold")->capture_default_str();
    app.add_option("--lr", cfg.lr, "initial Adam step size")->capture_default_str();
    app.add_option("--l2", cfg.l2, "L2 weight decay")->capture_default_str();
    app.add_option("--batch-size,--batch_size", cfg.batch_size, "minibatch size M")->capture_default_str();
    app.add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
    app.add_option("--gmm-refresh-every,--gmm_refresh_every", cfg.gmm_refresh_every,
                   "iterations between mixture refreshes")
        ->capture_default_str();
    app.add_option("--num-mixtures,--num_mixtures", cfg.num_mixtures, "mixture components K")
        ->capture_default_str();
    app.add_option("--latent-dim,--latent_dim", cfg.latent_dim, "latent dimension R")->capture_default_str();
    app.add_option("--hidden-units,--hidden_units", cfg.hidden_units, "units per hidden layer")
        ->capture_default_str();
    app.add_option("--hidden-layers,--hidden_layers", cfg.hidden_layers, "hidden layers per network")
        ->capture_default_str();
    app.add_option("--plateau-patience,--plateau_patience", cfg.plateau_patience,
                   "stale epochs before halving the step size")
        ->capture_default_str();
    app.add_option("--em-iters,--em_iters", cfg.em_iters, "EM iterations per mixture fit")->capture_default_str();
    app.add_option("--sampler-max-attempts,--sampler_max_attempts", cfg.sampler_max_attempts,
                   "rejection attempts per simulated sample")
        ->capture_default_str();
    app.add_option("--rho-deploy,--rho_deploy", cfg.rho_deploy, "FPR on training data of the stored threshold")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  }

  TrainConfig resolve() {
    cfg.mode = parse_train_mode(mode);
    cfg.validate();
    return cfg;
  }
};

// --help and friends exit 0; every other parse failure is a usage error.
int parse_exit(const CLI::App& app, const CLI::ParseError& e, std::ostream& out, std::ostream& err) {
  return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
}

void configure(CLI::App& app) {
  app.set_config("--config", "", "key=value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::ignore);
}

// ---------------------------------------------------------------------------

int cmd_features(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extract log-mel context features from WAV files", "npads features"};
  configure(app);
  std::string input, output, fit_stats, csv;
  bool augment = false;
  FeatureOptions feat;
  app.add_option("--in", input, "WAV file or directory (searched recursively)")->required();
  app.add_option("--out", output, "feature cache to write")->required();
  app.add_option("--fit-stats,--fit_stats", fit_stats, "fit normalization stats and write them here");
  app.add_option("--csv", csv, "also write the features as CSV");
  app.add_flag("--augment", augment, "add gain-scaled copies of every clip");
  feat.add_to(app);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return parse_exit(app, e, out, err);
  }
  const FeatureConfig cfg = feat.resolve();

  const auto files = list_wavs(input);
  std::vector<Mat> parts;
  std::vector<FrameIndexEntry> index;
  std::vector<std::string> failures;
  std::size_t frames = 0;
  for (const auto& path : files) {
    try {
      const AudioClip clip = read_wav(path);
      std::vector<AudioClip> copies;
      if (augment)
        copies = augment_gains(clip);
      else
        copies.push_back(clip);
      std::size_t n = 0;
      for (const auto& c : copies) {
        parts.push_back(extract_features(c, cfg).rows);
        n += static_cast<std::size_t>(parts.back().rows());
      }
      index.push_back({path.string(), frames, n});
      frames += n;
    } catch (const Error& e) {
      failures.push_back(path.string() + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) err << "error: " << f << '\n';
    err << failures.size() << " of " << files.size() << " input files failed\n";
    return kExitData;
  }

  Mat all(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(cfg.feature_dim()));
  Eigen::Index row = 0;
  for (const auto& p : parts) {
    all.middleRows(row, p.rows()) = p;
    row += p.rows();
  }
  write_feature_cache(output, all);
  write_frame_index(output + ".index.csv", index);
  if (!csv.empty()) write_feature_csv(csv, all);
  if (!fit_stats.empty()) {
    const std::vector<Mat> one = {all};
    write_norm_stats(fit_stats, fit_norm_stats(std::span<const Mat>(one)));
  }
  out << "wrote " << frames << " frames x " << cfg.feature_dim() << " dims from " << files.size() << " files to "
      << output << '\n';
  return kExitOk;
}

int cmd_train(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train an anomaly detector on feature caches", "npads train"};
  configure(app);
  std::string normal_path, various_path, model_path, stats_path, log_path;
  bool quiet = false;
  FeatureOptions feat;
  TrainOptions train_opts;
  app.add_option("--normal", normal_path, "feature cache of normal sounds")->required();
  app.add_option("--various", various_path, "feature cache of various sounds (not needed in AE mode)");
  app.add_option("--model", model_path, "model file to write")->required();
  app.add_option("--stats", stats_path, "normalization stats (fit on the training caches when omitted)");
  app.add_option("--log", log_path, "per-iteration training log (CSV)");
  app.add_flag("--quiet", quiet, "no per-epoch progress on stderr");
  feat.add_to(app);
  train_opts.add_to(app);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return parse_exit(app, e, out, err);
  }
  const FeatureConfig fcfg = feat.resolve();
  const TrainConfig cfg = train_opts.resolve();
  if (cfg.mode != TrainMode::AE && various_path.empty()) {
    err << "error: --various is required in " << to_string(cfg.mode) << " mode\n";
    return kExitUsage;
  }

  require_exists(normal_path);
  Mat normal = read_feature_cache(normal_path);
  Mat various(0, normal.cols());
  if (!various_path.empty()) {
    require_exists(various_path);
    various = read_feature_cache(various_path);
  }
  const auto q = static_cast<Eigen::Index>(fcfg.feature_dim());
  if (normal.cols() != q || various.cols() != q)
    throw DataError("feature caches have " + std::to_string(normal.cols()) + " and " +
                    std::to_string(various.cols()) + " dims; the feature config implies " + std::to_string(q));

  NormStats norm;
  if (!stats_path.empty()) {
    norm = read_norm_stats(stats_path);
    if (norm.mean.size() != q) throw DataError("normalization stats do not match the feature dimension");
  } else {
    std::vector<Mat> parts = {normal};
    if (various.rows() > 0) parts.push_back(various);
    norm = fit_norm_stats(std::span<const Mat>(parts));
  }
  apply_norm_inplace(normal, norm);
  apply_norm_inplace(various, norm);

  std::vector<TrainingLogRow> log;
  const auto progress = [&](const EpochSummary& s) {
    if (quiet) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch %zu/%zu loss %.6g lr %.3g%s\n", s.epoch + 1, cfg.epochs, s.loss, s.lr,
                  s.lr_halved ? " (halved)" : "");
    err << buf << std::flush;
  };
  TrainedModel model = train(normal, various, norm, cfg, log_path.empty() ? nullptr : &log, progress);
  model.features = fcfg;
  model.provenance = "command=train\nnormal=" + normal_path + "\nvarious=" + various_path + "\nstats=" + stats_path +
                     "\n" + feature_text(fcfg) + cfg.to_text();
  save_model(model_path, model);
  if (!log_path.empty()) write_training_log_csv(log_path, log);
  out << "model digest: " << model_digest(model) << '\n';
  out << "threshold (rho_deploy=" << fmt(cfg.rho_deploy) << "): " << fmt(model.threshold) << '\n';
  return kExitOk;
}

int cmd_simulate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Draw simulated anomalous feature vectors from a trained model", "npads simulate"};
  configure(app);
  std::string model_path, out_path, latents_path;
  std::size_t count = 512;
  std::optional<std::uint64_t> seed;
  std::optional<double> phi_z;
  app.add_option("--model", model_path, "model file")->required();
  app.add_option("--count", count, "number of vectors")->capture_default_str();
  app.add_option("--seed", seed, "random seed (default: the model's training seed)");
  app.add_option("--phi-z,--phi_z", phi_z, "latent threshold (default: the model's)");
  app.add_option("--out", out_path, "CSV of generated (normalized) feature vectors")->required();
  app.add_option("--latents", latents_path, "CSV of the accepted latent vectors");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return parse_exit(app, e, out, err);
  }
  require_exists(model_path);
  const TrainedModel model = load_model(model_path);
  Rng rng(seed.value_or(model.config.seed));
  SamplerConfig sc;
  sc.phi_z = phi_z.value_or(model.phi_z);
  sc.max_attempts = model.config.sampler_max_attempts;
  const AnomalousBatch batch = generate_anomalous_batch(model.generator, model.gmm, sc, count, rng);
  write_feature_csv(out_path, batch.inputs);
  if (!latents_path.empty()) write_feature_csv(latents_path, batch.latents);
  out << "generated " << count << " vectors, phi_z " << fmt(sc.phi_z) << ", acceptance rate "
      << fmt(batch.acceptance_rate()) << '\n';
  return kExitOk;
}

int cmd_detect(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score WAV files and emit per-clip verdicts", "npads detect"};
  configure(app);
  std::string model_path, input, out_path, frame_dir;
  std::optional<double> threshold, rho_deploy;
  double phi_v = 0.0;
  app.add_option("--model", model_path, "model file")->required();
  app.add_option("--input", input, "WAV file or directory (searched recursively)")->required();
  auto* t = app.add_option("--threshold", threshold, "anomaly-score threshold phi");
  app.add_option("--rho-deploy,--rho_deploy", rho_deploy, "recompute phi at this FPR over the training scores")
      ->excludes(t);
  app.add_option("--phi-v,--phi_v", phi_v, "clip threshold on the fraction of flagged frames")
      ->capture_default_str();
  app.add_option("--out", out_path, "JSON output (default: stdout)");
  app.add_option("--frame-scores,--frame_scores", frame_dir, "directory for per-frame score CSVs");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return parse_exit(app, e, out, err);
  }
  require_exists(model_path);
  const TrainedModel model = load_model(model_path);
  double phi = model.threshold;
  if (threshold) phi = *threshold;
  if (rho_deploy) {
    if (!(*rho_deploy > 0.0 && *rho_deploy < 1.0)) throw DataError("--rho-deploy must lie in (0, 1)");
    phi = deployed_threshold(model, *rho_deploy);
  }
  if (!frame_dir.empty()) fs::create_directories(frame_dir);

  const auto files = list_wavs(input);
  nlohmann::ordered_json clips = nlohmann::ordered_json::array();
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& path = files[i];
    try {
      const auto scores = clip_frame_scores(model, read_wav(path));
      const DetectionResult r = detect_frames(scores, phi, phi_v);
      nlohmann::ordered_json j;
      j["file"] = path.string();
      j["num_frames"] = r.frame_scores.size();
      j["v"] = r.v;
      j["anomalous"] = r.anomalous;
      j["max_score"] = r.max_score;
      clips.push_back(std::move(j));
      if (!frame_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof name, "%05zu_", i);
        const fs::path csv = fs::path(frame_dir) / (name + path.stem().string() + ".scores.csv");
        std::ofstream f(csv);
        if (!f) throw DataError("cannot write " + csv.string());
        f << "frame,score\n";
        for (std::size_t k = 0; k < scores.size(); ++k) f << k << ',' << fmt(scores[k]) << '\n';
      }
    } catch (const Error& e) {
      failures.push_back(path.string() + ": " + e.what());
    }
  }
  nlohmann::ordered_json doc;
  doc["model_digest"] = model_digest(model);
  doc["threshold"] = phi;
  doc["phi_v"] = phi_v;
  doc["clips"] = std::move(clips);
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw DataError("cannot write " + out_path);
    f << text;
  }
  if (!failures.empty()) {
    for (const auto& f : failures) err << "error: " << f << '\n';
    return kExitData;
  }
  return kExitOk;
}

std::string anr_file_tag(const EvalReport& r) {
  if (std::isnan(r.anr_db)) return "pooled";
  char buf[32];
  std::snprintf(buf, sizeof buf, "anr%+g", r.anr_db);
  return buf;
}

int cmd_eval(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate a model on normal clips mixed with anomalies", "npads eval"};
  configure(app);
  std::string model_path, normal_dir, anomaly_dir, out_path, roc_dir;
  std::vector<double> anrs = kDefaultAnrs;
  EvaluationOptions opts;
  std::uint64_t seed = 0;
  app.add_option("--model", model_path, "model file")->required();
  app.add_option("--normal-dir,--normal_dir", normal_dir, "normal test clips")->required();
  app.add_option("--anomaly-dir,--anomaly_dir", anomaly_dir,
                 "anomalous sounds; a clip's category is its parent directory name")
      ->required();
  app.add_option("--anr", anrs, "comma-separated anomaly-to-normal ratios in dB")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--rho", opts.rho, "FPR for rho-TPR")->capture_default_str();
  app.add_option("--p", opts.p, "FPR limit for the partial AUC")->capture_default_str();
  app.add_option("--seed", seed, "random seed for mixing")->capture_default_str();
  app.add_option("--out", out_path, "report JSON")->required();
  app.add_option("--roc-dir,--roc_dir", roc_dir, "directory for ROC CSVs");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return parse_exit(app, e, out, err);
  }
  if (!(opts.rho > 0.0 && opts.rho < 1.0)) throw DataError("--rho must lie in (0, 1)");
  if (!(opts.p > 0.0 && opts.p <= 1.0)) throw DataError("--p must lie in (0, 1]");
  require_exists(model_path);
  const TrainedModel model = load_model(model_path);

  std::vector<AudioClip> normals;
  for (const auto& p : list_wavs(normal_dir)) normals.push_back(read_wav(p));
  std::vector<AnomalySource> anomalies;
  const fs::path anomaly_root(anomaly_dir);
  for (const auto& p : list_wavs(anomaly_dir)) {
    std::string category = "anomaly";
    if (fs::is_directory(anomaly_root) && p.parent_path() != anomaly_root) category = p.parent_path().filename().string();
    anomalies.push_back({read_wav(p), category});
  }
  Rng rng(seed);
  const auto items = build_test_set(normals, anomalies, anrs, rng);
  const auto reports = evaluate_model(model, items, opts);

  {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw DataError("cannot write " + out_path);
    f << reports_to_json(reports);
  }
  if (!roc_dir.empty()) {
    fs::create_directories(roc_dir);
    for (const auto& r : reports) write_roc_csv(fs::path(roc_dir) / ("roc_" + anr_file_tag(r) + ".csv"), r.roc);
  }
  char line[160];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-10s auc %.4f  pauc(%.2g) %.4f  tpr@fpr=%.2g %.4f  (%zu normal, %zu anomalous)\n",
                  r.condition.c_str(), r.auc, r.pauc_p, r.pauc, r.rho, r.rho_tpr, r.num_normal, r.num_anomalous);
    out << line;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << kUsage;
    return kExitUsage;
  }
  const std::string& cmd = args.front();
  if (cmd == "-h" || cmd == "--help" || cmd == "help") {
    out << kUsage;
    return kExitOk;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  try {
    if (cmd == "features") return cmd_features(rest, out, err);
    if (cmd == "train") return cmd_train(rest, out, err);
    if (cmd == "simulate") return cmd_simulate(rest, out, err);
    if (cmd == "detect") return cmd_detect(rest, out, err);
    if (cmd == "eval") return cmd_eval(rest, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << "unknown command '" << cmd << "'\n\n" << kUsage;
  return kExitUsage;
}

}  // namespace npads::app
