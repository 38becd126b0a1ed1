// core/src/detector.cpp

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

#include "npads/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "npads/error.hpp"

namespace npads {

DetectionResult detect_frames(std::span<const double> frame_scores, double phi, double phi_v) {
  if (frame_scores.empty()) throw DataError("detect: no frames");
  DetectionResult r;
  r.frame_scores.assign(frame_scores.begin(), frame_scores.end());
  std::size_t above = 0;
  r.max_score = -std::numeric_limits<double>::infinity();
  for (double s : frame_scores) {
    if (s > phi) ++above;
    r.max_score = std::max(r.max_score, s);
  }
  r.v = static_cast<double>(above) / static_cast<double>(frame_scores.size());
  r.anomalous = r.v > phi_v;
  return r;
}

DetectionResult detect_clip(const TrainedModel& model, const FeatureMatrix& feats, double phi, double phi_v) {
  if (feats.dim() != model.encoder.input_dim())
    throw DataError("detect: feature dim " + std::to_string(feats.dim()) + " != model dim " +
                    std::to_string(model.encoder.input_dim()));
  const Vec s = score_frames(model, feats.rows);
  return detect_frames(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), phi, phi_v);
}

std::vector<double> clip_frame_scores(const TrainedModel& model, const AudioClip& clip) {
  FeatureMatrix f = extract_features(clip, model.features);
  apply_norm_inplace(f.rows, model.norm);
  const Vec s = score_frames(model, f.rows);
  return {s.data(), s.data() + s.size()};
}

double clip_score(const TrainedModel& model, const AudioClip& clip) {
  const auto s = clip_frame_scores(model, clip);
  return *std::max_element(s.begin(), s.end());
}

std::vector<TestItem> build_test_set(std::span<const AudioClip> normal_pool, std::span<const AnomalySource> anomaly_pool,
                                     std::span<const double> anr_list, Rng& rng) {
  if (normal_pool.empty()) throw DataError("test set: empty normal pool");
  if (anomaly_pool.empty()) throw DataError("test set: empty anomaly pool");
  if (anr_list.empty()) throw DataError("test set: empty ANR list");

  std::vector<TestItem> items;
  items.reserve(2 * anomaly_pool.size() * anr_list.size());
  std::vector<std::size_t> fits;
  for (std::size_t a = 0; a < anomaly_pool.size(); ++a) {
    const AudioClip& anomaly = anomaly_pool[a].clip;
    fits.clear();
    for (std::size_t k = 0; k < normal_pool.size(); ++k)
      if (normal_pool[k].size() >= anomaly.size()) fits.push_back(k);
    if (fits.empty())
      throw DataError("test set: no normal clip as long as anomaly " + std::to_string(a) + " (" +
                      std::to_string(anomaly.size()) + " samples)");
    for (double anr : anr_list) {
      const AudioClip& normal = normal_pool[fits[rng.index(fits.size())]];
      AnrMix mix = mix_at_anr(normal, anomaly, anr, rng);
      items.push_back({std::move(mix.normal_cut), false, anr, anomaly_pool[a].category, a});
      items.push_back({std::move(mix.mixture), true, anr, anomaly_pool[a].category, a});
    }
  }
  return items;
}

namespace {

std::string joined_categories(std::span<const TestItem> items, const std::vector<std::size_t>& idx) {
  std::set<std::string> cats;
  for (std::size_t i : idx)
    if (items[i].anomalous) cats.insert(items[i].category);
  std::string out;
  for (const auto& c : cats) {
    if (!out.empty()) out += '+';
    out += c;
  }
  return out;
}

std::string anr_label(double anr) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "anr=%g", anr);
  return buf;
}

}  // namespace

std::vector<EvalReport> evaluate_items(std::span<const TestItem> items, std::span<const double> scores,
                                       const EvaluationOptions& opts) {
  if (items.size() != scores.size()) throw DataError("evaluate: score count does not match test items");
  std::vector<double> anrs;
  for (const auto& it : items)
    if (std::find(anrs.begin(), anrs.end(), it.anr_db) == anrs.end()) anrs.push_back(it.anr_db);

  auto report_for = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> neg, pos;
    for (std::size_t i : idx) {
      if (!std::isfinite(scores[i])) throw NumericalError("evaluate: non-finite clip score");
      (items[i].anomalous ? pos : neg).push_back(scores[i]);
    }
    EvalReport r = evaluate_scores(neg, pos, opts.rho, opts.p);
    r.category = joined_categories(items, idx);
    return r;
  };

  std::vector<EvalReport> out;
  std::vector<std::size_t> all(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) all[i] = i;
  for (double anr : anrs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].anr_db == anr) idx.push_back(i);
    EvalReport r = report_for(idx);
    r.condition = anr_label(anr);
    r.anr_db = anr;
    out.push_back(std::move(r));
  }
  EvalReport pooled = report_for(all);
  pooled.condition = "pooled";
  out.push_back(std::move(pooled));
  return out;
}

std::vector<EvalReport> evaluate_model(const TrainedModel& model, std::span<const TestItem> items,
                                       const EvaluationOptions& opts) {
  std::vector<double> scores;
  scores.reserve(items.size());
  for (const auto& it : items) scores.push_back(clip_score(model, it.clip));
  return evaluate_items(items, scores, opts);
}

}  // namespace npads
