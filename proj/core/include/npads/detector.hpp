// core/include/npads/detector.hpp

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

#include <span>
#include <string>
#include <vector>

#include "npads/audio.hpp"
#include "npads/metrics.hpp"
#include "npads/model.hpp"
#include "npads/random.hpp"

namespace npads {

struct DetectionResult {
  std::vector<double> frame_scores;
  double v = 0.0;  // fraction of frames with score > phi
  bool anomalous = false;
  double max_score = 0.0;
};

// H = [score > phi] per frame, V = mean(H), anomalous iff V > phi_v.
DetectionResult detect_frames(std::span<const double> frame_scores, double phi, double phi_v = 0.0);

// feats must already be normalized with the model's stats.
DetectionResult detect_clip(const TrainedModel& model, const FeatureMatrix& feats, double phi, double phi_v = 0.0);

// Feature extraction, normalization and scoring with the model's front end.
std::vector<double> clip_frame_scores(const TrainedModel& model, const AudioClip& clip);

// Max per-frame score.
double clip_score(const TrainedModel& model, const AudioClip& clip);

struct AnomalySource {
  AudioClip clip;
  std::string category;
};

struct TestItem {
  AudioClip clip;
  bool anomalous = false;
  double anr_db = 0.0;
  std::string category;
  std::size_t source = 0;  // index into the anomaly pool
};

inline const std::vector<double> kDefaultAnrs = {-15.0, -20.0, -25.0};

// For every anomaly clip and every ANR: one normal cut (normal) and one mixture
// (anomalous). The normal clip is drawn at random among those at least as long
// as the anomaly.
std::vector<TestItem> build_test_set(std::span<const AudioClip> normal_pool, std::span<const AnomalySource> anomaly_pool,
                                     std::span<const double> anr_list, Rng& rng);

struct EvaluationOptions {
  double rho = 0.05;
  double p = 0.1;
};

// One report per ANR (ascending by appearance in the test set) and a final
// pooled report.
std::vector<EvalReport> evaluate_items(std::span<const TestItem> items, std::span<const double> scores,
                                       const EvaluationOptions& opts = {});

std::vector<EvalReport> evaluate_model(const TrainedModel& model, std::span<const TestItem> items,
                                       const EvaluationOptions& opts = {});

}  // namespace npads
