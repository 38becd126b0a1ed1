// core/src/trainer.cpp

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

#include "npads/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "npads/error.hpp"
#include "npads/model.hpp"
#include "npads/objectives.hpp"
#include "npads/sampler.hpp"

namespace npads {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::AE: return "AE";
    case TrainMode::NP: return "NP";
    case TrainMode::AUC: return "AUC";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "AE") return TrainMode::AE;
  if (text == "NP") return TrainMode::NP;
  if (text == "AUC") return TrainMode::AUC;
  throw DataError("unknown training mode '" + std::string(text) + "' (expected AE, NP or AUC)");
}

void TrainConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw DataError("rho must lie in (0, 1)");
  if (!(rho_deploy > 0.0 && rho_deploy < 1.0)) throw DataError("rho_deploy must lie in (0, 1)");
  if (!(lr > 0.0)) throw DataError("lr must be positive");
  if (!(l2 >= 0.0)) throw DataError("l2 must be non-negative");
  if (batch_size < 2) throw DataError("batch_size must be >= 2");
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (gmm_refresh_every < 1) throw DataError("gmm_refresh_every must be >= 1");
  if (num_mixtures < 1) throw DataError("num_mixtures must be >= 1");
  if (latent_dim < 1 || hidden_units < 1) throw DataError("network widths must be >= 1");
  if (plateau_patience < 1) throw DataError("plateau_patience must be >= 1");
  if (sampler_max_attempts < 1) throw DataError("sampler_max_attempts must be >= 1");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw DataError("config: bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  return out;
}

}  // namespace

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out << "mode=" << to_string(mode) << '\n'
      << "rho=" << format_double(rho) << '\n'
      << "lr=" << format_double(lr) << '\n'
      << "l2=" << format_double(l2) << '\n'
      << "batch_size=" << batch_size << '\n'
      << "epochs=" << epochs << '\n'
      << "gmm_refresh_every=" << gmm_refresh_every << '\n'
      << "num_mixtures=" << num_mixtures << '\n'
      << "latent_dim=" << latent_dim << '\n'
      << "hidden_units=" << hidden_units << '\n'
      << "hidden_layers=" << hidden_layers << '\n'
      << "plateau_patience=" << plateau_patience << '\n'
      << "em_iters=" << em_iters << '\n'
      << "sampler_max_attempts=" << sampler_max_attempts << '\n'
      << "rho_deploy=" << format_double(rho_deploy) << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

TrainConfig TrainConfig::from_text(std::string_view text) {
  TrainConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "mode") cfg.mode = parse_train_mode(value);
    else if (key == "rho") cfg.rho = parse_number<double>(key, value);
    else if (key == "lr") cfg.lr = parse_number<double>(key, value);
    else if (key == "l2") cfg.l2 = parse_number<double>(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "epochs") cfg.epochs = parse_number<std::size_t>(key, value);
    else if (key == "gmm_refresh_every") cfg.gmm_refresh_every = parse_number<std::size_t>(key, value);
    else if (key == "num_mixtures") cfg.num_mixtures = parse_number<std::size_t>(key, value);
    else if (key == "latent_dim") cfg.latent_dim = parse_number<std::size_t>(key, value);
    else if (key == "hidden_units") cfg.hidden_units = parse_number<std::size_t>(key, value);
    else if (key == "hidden_layers") cfg.hidden_layers = parse_number<std::size_t>(key, value);
    else if (key == "plateau_patience") cfg.plateau_patience = parse_number<std::size_t>(key, value);
    else if (key == "em_iters") cfg.em_iters = parse_number<std::size_t>(key, value);
    else if (key == "sampler_max_attempts") cfg.sampler_max_attempts = parse_number<std::size_t>(key, value);
    else if (key == "rho_deploy") cfg.rho_deploy = parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else throw DataError("config: unknown key '" + key + "'");
  }
  return cfg;
}

bool PlateauSchedule::observe(double epoch_loss) {
  if (!has_best_ || epoch_loss < best_) {
    best_ = epoch_loss;
    has_best_ = true;
    stale_ = 0;
    return false;
  }
  if (++stale_ >= patience_) {
    stale_ = 0;
    return true;
  }
  return false;
}

namespace {

constexpr Eigen::Index kChunkRows = 8192;

Mat encode_all(const Mlp& encoder, const Mat& x) {
  Mat z(x.rows(), static_cast<Eigen::Index>(encoder.output_dim()));
  for (Eigen::Index start = 0; start < x.rows(); start += kChunkRows) {
    const Eigen::Index n = std::min(kChunkRows, x.rows() - start);
    z.middleRows(start, n) = predict(encoder, x.middleRows(start, n));
  }
  return z;
}

EmOptions em_options(const TrainConfig& cfg) {
  EmOptions opts;
  opts.max_iters = static_cast<int>(cfg.em_iters);
  return opts;
}

Mat gather_rows(const Mat& src, std::span<const std::size_t> idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void require_finite(double v, const char* what, std::size_t epoch, std::size_t iteration) {
  if (!std::isfinite(v)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "non-finite %s at epoch %zu, iteration %zu", what, epoch, iteration);
    throw NumericalError(buf);
  }
}

std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

TrainingState init_training_state(const Mat& normal, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (normal.rows() == 0) throw DataError("init_training_state: no normal data");
  const std::size_t q = static_cast<std::size_t>(normal.cols());
  const std::size_t r = cfg.latent_dim;
  TrainingState s;
  const auto enc_dims = fnn_dims(q, cfg.hidden_units, cfg.hidden_layers, r);
  const auto dec_dims = fnn_dims(r, cfg.hidden_units, cfg.hidden_layers, q);
  s.encoder = init_mlp(enc_dims, rng);
  s.decoder = init_mlp(dec_dims, rng);
  s.generator = init_mlp(dec_dims, rng);
  s.gmm = em_fit(encode_all(s.encoder, normal), cfg.num_mixtures, em_options(cfg), rng).gmm;
  return s;
}

TrainingSession::TrainingSession(const Mat& normal, const Mat& various, const TrainConfig& cfg)
    : normal_(normal),
      various_(various),
      cfg_(cfg),
      init_rng_(cfg.seed),
      state_(init_training_state(normal, cfg, init_rng_)),
      batch_rng_(init_rng_.fork(1)),
      sampler_rng_(init_rng_.fork(2)),
      adam_kr_encoder_(state_.encoder),
      adam_generator_(state_.generator),
      adam_obj_encoder_(state_.encoder),
      adam_decoder_(state_.decoder),
      schedule_(cfg.plateau_patience),
      lr_(cfg.lr) {
  if (cfg_.mode != TrainMode::AE) {
    if (various_.rows() == 0) throw DataError("training: no various-sound data");
    if (various_.cols() != normal_.cols())
      throw DataError("training: normal and various features differ in dimension");
  }
}

AdamConfig TrainingSession::adam_config() const {
  AdamConfig a;
  a.lr = lr_;
  a.l2 = cfg_.l2;
  return a;
}

KrStepReport TrainingSession::kr_step() {
  const std::size_t m = cfg_.batch_size;
  std::vector<std::size_t> idx(m);
  for (auto& i : idx) i = batch_rng_.index(static_cast<std::size_t>(various_.rows()));
  const Mat batch = gather_rows(various_, idx);

  KrResult kr = j_kr_with_grads(state_.encoder, state_.generator, batch);
  require_finite(kr.value, "J^KR", epoch_, iteration_);
  const AdamConfig a = adam_config();
  adam_step(state_.encoder, kr.encoder, adam_kr_encoder_, a, Direction::Descend);
  adam_step(state_.generator, kr.generator, adam_generator_, a, Direction::Descend);
  return {kr.value, kr.kld, kr.reconstruction};
}

ObjectiveStepReport TrainingSession::objective_step(const Mat& normal_batch) {
  ObjectiveStepReport rep;
  const AutoencoderPass normal_pass = autoencoder_forward(state_.encoder, state_.decoder, normal_batch);
  const std::size_t m = static_cast<std::size_t>(normal_batch.rows());

  rep.phi_rho = select_threshold(as_span(normal_pass.scores), cfg_.rho);
  rep.fraction_above_phi =
      static_cast<double>((normal_pass.scores.array() > rep.phi_rho).count()) / static_cast<double>(m);

  Vec nll = -log_pdf_rows(state_.gmm, normal_pass.encoded.output);
  std::vector<double> sorted_nll(nll.data(), nll.data() + nll.size());
  std::sort(sorted_nll.begin(), sorted_nll.end(), std::greater<>());
  std::size_t rank = threshold_rank(m, cfg_.rho);

  AnomalousBatch anomalies;
  for (;;) {
    SamplerConfig sc;
    sc.phi_z = sorted_nll[rank - 1];
    sc.max_attempts = cfg_.sampler_max_attempts;
    try {
      anomalies = generate_anomalous_batch(state_.generator, state_.gmm, sc, m, sampler_rng_);
      rep.phi_z = sc.phi_z;
      break;
    } catch (const RejectionBudgetExhausted&) {
      if (rank >= m) throw NumericalError("anomaly sampler exhausted even at the lowest latent threshold");
      ++rank;
      ++rep.relaxations;
      std::fprintf(stderr, "[npads] sampler budget exhausted at iteration %zu; relaxing phi_z to rank %zu\n",
                   iteration_, rank);
    }
  }
  rep.acceptance_rate = anomalies.acceptance_rate();

  const AutoencoderPass anomaly_pass = autoencoder_forward(state_.encoder, state_.decoder, anomalies.inputs);
  const ScoreObjective obj = cfg_.mode == TrainMode::AUC
                                 ? j_auc(as_span(anomaly_pass.scores), as_span(normal_pass.scores))
                                 : j_np(as_span(anomaly_pass.scores), as_span(normal_pass.scores), rep.phi_rho);
  rep.objective = obj.value;
  require_finite(obj.value, cfg_.mode == TrainMode::AUC ? "J^AUC" : "J^NP", epoch_, iteration_);

  AutoencoderGrads g =
      autoencoder_backward(state_.encoder, state_.decoder, normal_pass, normal_batch, obj.grad_normal);
  const AutoencoderGrads ga =
      autoencoder_backward(state_.encoder, state_.decoder, anomaly_pass, anomalies.inputs, obj.grad_anomalous);
  g.encoder += ga.encoder;
  g.decoder += ga.decoder;

  const AdamConfig a = adam_config();
  adam_step(state_.encoder, g.encoder, adam_obj_encoder_, a, Direction::Ascend);
  adam_step(state_.decoder, g.decoder, adam_decoder_, a, Direction::Ascend);
  return rep;
}

double TrainingSession::ae_step(const Mat& normal_batch) {
  const AutoencoderPass pass = autoencoder_forward(state_.encoder, state_.decoder, normal_batch);
  const double m = static_cast<double>(normal_batch.rows());
  const double loss = pass.scores.sum() / m;
  require_finite(loss, "reconstruction loss", epoch_, iteration_);
  const AutoencoderGrads g = autoencoder_backward(state_.encoder, state_.decoder, pass, normal_batch,
                                                  Vec::Constant(normal_batch.rows(), 1.0 / m));
  const AdamConfig a = adam_config();
  adam_step(state_.encoder, g.encoder, adam_obj_encoder_, a, Direction::Descend);
  adam_step(state_.decoder, g.decoder, adam_decoder_, a, Direction::Descend);
  return loss;
}

double TrainingSession::refresh_gmm() {
  const EmResult r = em_refine(state_.gmm, encode_all(state_.encoder, normal_), em_options(cfg_));
  state_.gmm = r.gmm;
  em_loglik_ = r.loglik.back();
  return em_loglik_;
}

EpochSummary TrainingSession::run_epoch(std::vector<TrainingLogRow>* log) {
  const std::size_t n = static_cast<std::size_t>(normal_.rows());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[batch_rng_.index(i)]);

  const std::size_t bs = std::min(cfg_.batch_size, n);
  const std::size_t batches = std::max<std::size_t>(1, n / bs);
  double loss_sum = 0.0;

  for (std::size_t b = 0; b < batches; ++b) {
    const Mat batch = gather_rows(normal_, std::span<const std::size_t>(perm).subspan(b * bs, bs));
    TrainingLogRow row;
    if (cfg_.mode == TrainMode::AE) {
      row.j_objective = ae_step(batch);
      loss_sum += row.j_objective;
    } else {
      const KrStepReport kr = kr_step();
      const ObjectiveStepReport obj = objective_step(batch);
      row.j_kr = kr.value;
      row.j_objective = obj.objective;
      row.acceptance_rate = obj.acceptance_rate;
      loss_sum += kr.value - obj.objective;
    }
    ++iteration_;
    if (cfg_.mode != TrainMode::AE && iteration_ % cfg_.gmm_refresh_every == 0) refresh_gmm();

    row.iteration = iteration_;
    row.epoch = epoch_;
    row.lr = lr_;
    row.em_loglik = em_loglik_;
    if (log) log->push_back(row);
  }

  EpochSummary s;
  s.epoch = epoch_;
  s.loss = loss_sum / static_cast<double>(batches);
  require_finite(s.loss, "epoch loss", epoch_, iteration_);
  s.lr_halved = schedule_.observe(s.loss);
  if (s.lr_halved) lr_ *= 0.5;
  s.lr = lr_;
  ++epoch_;
  return s;
}

TrainedModel train(const Mat& normal, const Mat& various, const NormStats& norm, const TrainConfig& cfg,
                   std::vector<TrainingLogRow>* log, const EpochCallback& on_epoch) {
  cfg.validate();
  if (normal.rows() < 2) throw DataError("train: need at least 2 normal frames");
  if (cfg.mode != TrainMode::AE && various.rows() == 0) throw DataError("train: no various-sound data");
  if (norm.mean.size() != normal.cols()) throw DataError("train: normalization stats do not match features");

  TrainingSession session(normal, various, cfg);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const EpochSummary s = session.run_epoch(log);
    if (on_epoch) on_epoch(s);
  }

  const TrainingState& st = session.state();
  TrainedModel model;
  model.encoder = st.encoder;
  model.decoder = st.decoder;
  model.generator = st.generator;
  model.gmm = st.gmm;
  model.norm = norm;
  model.config = cfg;

  const Vec scores = anomaly_scores(st.encoder, st.decoder, normal);
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores(i))) throw NumericalError("train: non-finite anomaly score on training data");
  model.training_scores.assign(scores.data(), scores.data() + scores.size());
  std::sort(model.training_scores.begin(), model.training_scores.end(), std::greater<>());
  model.threshold = select_threshold(model.training_scores, cfg.rho_deploy);

  const Vec nll = -log_pdf_rows(st.gmm, encode_all(st.encoder, normal));
  model.phi_z = select_threshold(as_span(nll), cfg.rho);
  return model;
}

void write_training_log_csv(const std::string& path, const std::vector<TrainingLogRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write " + path);
  std::fprintf(f, "iteration,epoch,j_kr,j_objective,lr,acceptance_rate,em_loglik\n");
  for (const auto& r : rows)
    std::fprintf(f, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.epoch, r.j_kr, r.j_objective, r.lr,
                 r.acceptance_rate, r.em_loglik);
  std::fclose(f);
}

}  // namespace npads
