// tests/unit/detector_test.cpp

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "dsp_oracle.hpp"
#include "npads/detector.hpp"
#include "npads/error.hpp"
#include "npads/model.hpp"
#include "synth.hpp"

namespace npads {
namespace {

TEST(DetectorTest, NoFrameAboveThreshold) {
  const std::vector<double> s{0.1, 0.5, 0.9};
  const DetectionResult r = detect_frames(s, 1.0);
  EXPECT_EQ(r.v, 0.0);
  EXPECT_FALSE(r.anomalous);
  EXPECT_EQ(r.max_score, 0.9);
  EXPECT_EQ(r.frame_scores, s);
}

TEST(DetectorTest, SingleFrameRule) {
  std::vector<double> s(100, 0.2);
  s[37] = 5.0;
  const DetectionResult r = detect_frames(s, 1.0);
  EXPECT_DOUBLE_EQ(r.v, 0.01);
  EXPECT_TRUE(r.anomalous);
}

TEST(DetectorTest, ScoreEqualToThresholdIsNotAbove) {
  const std::vector<double> s{1.0, 1.0};
  EXPECT_FALSE(detect_frames(s, 1.0).anomalous);
}

TEST(DetectorTest, FractionMatchesScalarLoop) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(1 + rng.index(200));
    for (double& x : s) x = rng.normal();
    const double phi = rng.normal(), phi_v = rng.uniform() * 0.5;
    int above = 0;
    for (double x : s)
      if (x > phi) ++above;
    const double v = static_cast<double>(above) / static_cast<double>(s.size());
    const DetectionResult r = detect_frames(s, phi, phi_v);
    EXPECT_DOUBLE_EQ(r.v, v);
    EXPECT_EQ(r.anomalous, v > phi_v);
    EXPECT_GE(r.v, 0.0);
    EXPECT_LE(r.v, 1.0);
    // with phi_v = 0 the verdict reduces to max > phi
    EXPECT_EQ(detect_frames(s, phi).anomalous, *std::max_element(s.begin(), s.end()) > phi);
  }
}

TEST(DetectorTest, EmptyScoresRejected) {
  EXPECT_THROW(detect_frames(std::vector<double>{}, 0.0), DataError);
}

TEST(DetectorTest, DetectClipChecksDimension) {
  TrainedModel m;
  m.encoder = Mlp({Layer{Mat::Identity(3, 3), Vec::Zero(3), Activation::Linear}});
  m.decoder = Mlp({Layer{Mat::Zero(3, 3), Vec::Zero(3), Activation::Linear}});
  FeatureMatrix f;
  f.rows = Mat::Zero(4, 5);
  EXPECT_THROW(detect_clip(m, f, 0.0), DataError);
  f.rows = Mat::Zero(4, 3);
  f.rows(2, 1) = 2.0;
  // decoder outputs zero so the score is the squared norm of the row
  const DetectionResult r = detect_clip(m, f, 1.0);
  EXPECT_DOUBLE_EQ(r.v, 0.25);
  EXPECT_EQ(r.max_score, 4.0);
}

TEST(DetectorTest, TestSetCountsAndBalance) {
  Rng rng(2);
  const auto normal = testing::normal_template();
  std::vector<AudioClip> normal_pool;
  for (int i = 0; i < 3; ++i) normal_pool.push_back(testing::render(normal, 3.0, rng));
  std::vector<AnomalySource> anomalies;
  for (const auto& t : testing::anomaly_templates())
    for (int i = 0; i < 2; ++i) anomalies.push_back({testing::render(t, 1.0, rng), t.name});
  const auto items = build_test_set(normal_pool, anomalies, kDefaultAnrs, rng);
  ASSERT_EQ(items.size(), anomalies.size() * kDefaultAnrs.size() * 2);
  std::map<double, std::pair<int, int>> per_anr;
  for (const TestItem& it : items) {
    auto& c = per_anr[it.anr_db];
    (it.anomalous ? c.second : c.first)++;
    EXPECT_EQ(it.clip.size(), anomalies[it.source].clip.size());
  }
  ASSERT_EQ(per_anr.size(), 3u);
  for (const auto& [anr, c] : per_anr) {
    EXPECT_EQ(c.first, static_cast<int>(anomalies.size())) << anr;
    EXPECT_EQ(c.second, static_cast<int>(anomalies.size())) << anr;
  }
}

TEST(DetectorTest, MixturesHitTargetAnr) {
  Rng rng(3);
  const auto normal = testing::normal_template();
  std::vector<AudioClip> normal_pool{testing::render(normal, 4.0, rng), testing::render(normal, 4.0, rng)};
  std::vector<AnomalySource> anomalies;
  for (const auto& t : testing::anomaly_templates()) anomalies.push_back({testing::render(t, 2.0, rng), t.name});
  const auto items = build_test_set(normal_pool, anomalies, kDefaultAnrs, rng);
  for (std::size_t i = 0; i < items.size(); i += 2) {
    const TestItem& cut = items[i];
    const TestItem& mix = items[i + 1];
    ASSERT_FALSE(cut.anomalous);
    ASSERT_TRUE(mix.anomalous);
    // recover the added anomaly as mixture minus normal cut
    AudioClip added;
    added.samples.resize(mix.clip.size());
    for (std::size_t k = 0; k < added.size(); ++k) added.samples[k] = mix.clip.samples[k] - cut.clip.samples[k];
    const double anr = testing::oracle_median_power(added) - testing::oracle_median_power(cut.clip);
    EXPECT_NEAR(anr, mix.anr_db, 0.1);
  }
}

TEST(DetectorTest, AnomalyLongerThanEveryNormalRejected) {
  Rng rng(4);
  std::vector<AudioClip> normal_pool{testing::render(testing::normal_template(), 1.0, rng)};
  std::vector<AnomalySource> anomalies{{testing::render(testing::anomaly_templates()[0], 2.0, rng), "x"}};
  EXPECT_THROW(build_test_set(normal_pool, anomalies, kDefaultAnrs, rng), DataError);
}

TEST(DetectorTest, EvaluateItemsGroupsByAnr) {
  std::vector<TestItem> items;
  std::vector<double> scores;
  for (double anr : {-15.0, -20.0})
    for (int i = 0; i < 4; ++i) {
      TestItem n, a;
      n.anr_db = a.anr_db = anr;
      a.anomalous = true;
      a.category = i % 2 ? "rattle" : "whine";
      items.push_back(n);
      items.push_back(a);
      scores.push_back(i);
      scores.push_back(anr == -15.0 ? 10.0 + i : i + 0.5);
    }
  const auto reports = evaluate_items(items, scores);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].condition, "anr=-15");
  EXPECT_EQ(reports[0].auc, 1.0);
  EXPECT_EQ(reports[0].category, "rattle+whine");
  EXPECT_EQ(reports[1].condition, "anr=-20");
  EXPECT_EQ(reports[1].num_normal, 4u);
  // anomaly i+0.5 beats normals 0..i: (1+2+3+4)/16
  EXPECT_DOUBLE_EQ(reports[1].auc, 10.0 / 16.0);
  EXPECT_EQ(reports[2].condition, "pooled");
  EXPECT_EQ(reports[2].num_anomalous, 8u);
  EXPECT_TRUE(std::isnan(reports[2].anr_db));
}

}  // namespace
}  // namespace npads
