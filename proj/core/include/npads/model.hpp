// core/include/npads/model.hpp

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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "npads/audio.hpp"
#include "npads/gmm.hpp"
#include "npads/mlp.hpp"
#include "npads/trainer.hpp"

namespace npads {

struct TrainedModel {
  Mlp encoder;
  Mlp decoder;
  Mlp generator;
  NormStats norm;
  DiagGmm gmm;
  double threshold = 0.0;  // deployed phi at config.rho_deploy
  double phi_z = 0.0;      // latent threshold at config.rho over training normal latents
  std::vector<double> training_scores;  // anomaly scores of normal training frames, descending
  TrainConfig config;
  FeatureConfig features;  // front end the model was trained on
  std::string provenance;  // run configuration echoed by the caller
};

// Model file:
//   char[8] "NPADSMDL", u32 version, config text, provenance text,
//   feature config (u64 frame_len, hop, n_mels, context; f64 eps; u8 window),
//   norm stats block, encoder / decoder / generator blocks, gmm block,
//   f64 threshold, f64 phi_z, training scores, u64 FNV-1a digest of all
//   preceding bytes.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

// Hex content digest of the serialized model.
std::string model_digest(const TrainedModel& model);

// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

// Threshold over the stored training scores at a different deployment FPR.
double deployed_threshold(const TrainedModel& model, double rho_deploy);

// Anomaly scores for already-normalized feature rows.
Vec score_frames(const TrainedModel& model, const Mat& normalized_rows);

}  // namespace npads
