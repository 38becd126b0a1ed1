// core/include/npads/trainer.hpp

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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "npads/audio.hpp"
#include "npads/gmm.hpp"
#include "npads/matrix.hpp"
#include "npads/mlp.hpp"
#include "npads/random.hpp"

namespace npads {

enum class TrainMode { AE, NP, AUC };

std::string_view to_string(TrainMode mode);
// Throws DataError for anything other than AE, NP or AUC.
TrainMode parse_train_mode(std::string_view text);

struct TrainConfig {
  TrainMode mode = TrainMode::NP;
  double rho = 0.2;
  double lr = 1e-4;
  double l2 = 1e-4;
  std::size_t batch_size = 512;
  std::size_t epochs = 500;
  std::size_t gmm_refresh_every = 30;
  std::size_t num_mixtures = 16;
  std::size_t latent_dim = 40;
  std::size_t hidden_units = 512;
  std::size_t hidden_layers = 3;
  std::size_t plateau_patience = 5;
  std::size_t em_iters = 20;
  std::size_t sampler_max_attempts = 10000;
  double rho_deploy = 0.001;
  std::uint64_t seed = 0;

  void validate() const;
  // key=value lines, one per field, in declaration order.
  std::string to_text() const;
  static TrainConfig from_text(std::string_view text);
};

// Halves the step size after `patience` consecutive epochs whose loss does not
// improve on the best seen so far.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(std::size_t patience) : patience_(patience) {}

  // Returns true when the step size should be halved after this epoch.
  bool observe(double epoch_loss);
  std::size_t stale_epochs() const { return stale_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
};

struct TrainingState {
  Mlp encoder;    // Q -> R
  Mlp decoder;    // R -> Q
  Mlp generator;  // R -> Q
  DiagGmm gmm;    // over normal latents
};

// Glorot-initialized networks and a mixture fit by EM on the initial
// encoder's latents of all normal data.
TrainingState init_training_state(const Mat& normal, const TrainConfig& cfg, Rng& rng);

struct KrStepReport {
  double value = 0.0;
  double kld = 0.0;
  double reconstruction = 0.0;
};

struct ObjectiveStepReport {
  double objective = 0.0;  // J^NP, J^AUC, or mean reconstruction in AE mode
  double phi_rho = 0.0;
  double phi_z = 0.0;
  double acceptance_rate = 1.0;
  std::size_t relaxations = 0;   // phi_z relaxations after sampler exhaustion
  double fraction_above_phi = 0.0;  // normal batch scores strictly above phi_rho
};

struct TrainingLogRow {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double j_kr = 0.0;
  double j_objective = 0.0;
  double lr = 0.0;
  double acceptance_rate = 1.0;
  double em_loglik = 0.0;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double loss = 0.0;  // schedule loss: J^KR - J^NP (or - J^AUC), AE: mean reconstruction
  double lr = 0.0;
  bool lr_halved = false;
};

// Step-wise training driver. Holds references to the (normalized) training
// matrices, which must outlive the session.
class TrainingSession {
 public:
  TrainingSession(const Mat& normal, const Mat& various, const TrainConfig& cfg);

  // Step 1: minimize J^KR over a various-sound minibatch (encoder, generator).
  KrStepReport kr_step();
  // Step 2: maximize J^NP / J^AUC on a normal minibatch and a simulated
  // anomalous minibatch (encoder, decoder).
  ObjectiveStepReport objective_step(const Mat& normal_batch);
  // AE baseline: minimize mean reconstruction error (encoder, decoder).
  double ae_step(const Mat& normal_batch);
  // Step 3: refresh the mixture by EM on latents of all normal data.
  double refresh_gmm();

  // One pass over the normal data in shuffled minibatches.
  EpochSummary run_epoch(std::vector<TrainingLogRow>* log = nullptr);

  const TrainingState& state() const { return state_; }
  const TrainConfig& config() const { return cfg_; }
  double learning_rate() const { return lr_; }
  std::size_t iteration() const { return iteration_; }
  std::size_t epoch() const { return epoch_; }
  double last_em_loglik() const { return em_loglik_; }

 private:
  AdamConfig adam_config() const;

  const Mat& normal_;
  const Mat& various_;
  TrainConfig cfg_;
  Rng init_rng_;
  TrainingState state_;
  Rng batch_rng_;
  Rng sampler_rng_;
  AdamState adam_kr_encoder_, adam_generator_, adam_obj_encoder_, adam_decoder_;
  PlateauSchedule schedule_;
  double lr_;
  double em_loglik_ = 0.0;
  std::size_t iteration_ = 0;
  std::size_t epoch_ = 0;
};

struct TrainedModel;

using EpochCallback = std::function<void(const EpochSummary&)>;

// Full training run. `normal` and `various` must already be normalized with
// `norm`. The model's deployed threshold is set at cfg.rho_deploy over the
// training normal scores.
TrainedModel train(const Mat& normal, const Mat& various, const NormStats& norm, const TrainConfig& cfg,
                   std::vector<TrainingLogRow>* log = nullptr, const EpochCallback& on_epoch = {});

void write_training_log_csv(const std::string& path, const std::vector<TrainingLogRow>& rows);

}  // namespace npads
