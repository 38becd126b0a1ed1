// tests/unit/audio_test.cpp

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
#include <numbers>

#include "npads/audio.hpp"
#include "dsp_oracle.hpp"
#include "npads/error.hpp"

namespace npads {
namespace {

using testing::direct_dft_mags;
using testing::oracle_median_power;

AudioClip noise_clip(std::size_t n, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  AudioClip c;
  c.samples.resize(n);
  for (auto& s : c.samples) s = scale * (2.0 * rng.uniform() - 1.0);
  return c;
}

TEST(FrameCountTest, FramingFormula) {
  EXPECT_EQ(frame_count(1024, 512, 256), 3u);
  EXPECT_EQ(frame_count(16000, 512, 256), 61u);
  EXPECT_EQ(frame_count(511, 512, 256), 0u);
  EXPECT_EQ(frame_count(512, 512, 256), 1u);
}

TEST(StftTest, ZeroClipGivesZeroMagnitudes) {
  AudioClip c;
  c.samples.assign(1024, 0.0);
  const Spectrogram s = stft(c);
  EXPECT_EQ(s.num_frames(), 3u);
  EXPECT_EQ(s.num_bins(), 257u);
  EXPECT_EQ(s.mags.cwiseAbs().maxCoeff(), 0.0);
}

TEST(StftTest, ShortClipRejected) {
  AudioClip c;
  c.samples.assign(511, 0.1);
  try {
    stft(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("clip too short"), std::string::npos);
  }
}

TEST(StftTest, SineAtBinPeaksThereAndMatchesDirectDft) {
  AudioClip c;
  c.samples.resize(1024);
  for (std::size_t i = 0; i < c.size(); ++i) c.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 32.0 * i / 512.0);
  const Spectrogram s = stft(c, 512, 256, Window::Rectangular);
  for (std::size_t t = 0; t < s.num_frames(); ++t) {
    Eigen::Index arg = 0;
    s.mags.row(static_cast<Eigen::Index>(t)).maxCoeff(&arg);
    EXPECT_EQ(arg + 1, 33);  // 1-based bin index
    const auto oracle = direct_dft_mags(c.samples.data() + t * 256, 512, false);
    EXPECT_NEAR(s.mags(static_cast<Eigen::Index>(t), 32), oracle[32], 1e-6 * oracle[32]);
    EXPECT_NEAR(oracle[32], 0.5 * 256.0, 1e-9);
  }
}

TEST(StftTest, RandomSignalsMatchDirectDft) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const AudioClip c = noise_clip(2048, seed);
    const Spectrogram s = stft(c);
    ASSERT_EQ(s.num_frames(), 7u);
    for (std::size_t t = 0; t < s.num_frames(); ++t) {
      const auto oracle = direct_dft_mags(c.samples.data() + t * 256, 512, true);
      const double scale = *std::max_element(oracle.begin(), oracle.end());
      for (std::size_t k = 0; k < oracle.size(); ++k)
        EXPECT_LE(std::abs(s.mags(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) - oracle[k]),
                  1e-6 * std::max(oracle[k], 1e-3 * scale))
            << "frame " << t << " bin " << k;
    }
  }
}

TEST(StftTest, MagnitudesNonNegative) {
  const Spectrogram s = stft(noise_clip(4096, 9));
  EXPECT_GE(s.mags.minCoeff(), 0.0);
}

TEST(MelFilterbankTest, ShapeAndRange) {
  const Mat fb = mel_filterbank(40, 512);
  ASSERT_EQ(fb.rows(), 40);
  ASSERT_EQ(fb.cols(), 257);
  EXPECT_GE(fb.minCoeff(), 0.0);
  EXPECT_LE(fb.maxCoeff(), 1.0);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << "empty filter " << m;
}

TEST(MelFilterbankTest, AdjacentTrianglesSumToOneBetweenFirstAndLastCenter) {
  // Triangles that share edges form a partition of unity between the first
  // and last centre frequencies.
  const Mat fb = mel_filterbank(40, 512);
  const auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double step = mel(8000.0) / 41.0;
  const double first_center = hz(step), last_center = hz(40.0 * step);
  int checked = 0;
  for (Eigen::Index k = 0; k < fb.cols(); ++k) {
    const double f = k * 16000.0 / 512.0;
    if (f <= first_center || f >= last_center) continue;
    EXPECT_NEAR(fb.col(k).sum(), 1.0, 1e-12) << "bin " << k;
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(LogMelTest, ZeroFrameHitsFloor) {
  Spectrogram s;
  s.mags = Mat::Zero(2, 257);
  FeatureConfig cfg;
  const Mat out = log_mel(s, cfg);
  ASSERT_EQ(out.cols(), 40);
  for (Eigen::Index i = 0; i < out.size(); ++i) EXPECT_EQ(out.data()[i], std::log(cfg.eps_floor));
}

TEST(LogMelTest, FlatSpectrumEqualsDenseProductOracle) {
  Spectrogram s;
  s.mags = Mat::Ones(1, 257);
  FeatureConfig cfg;
  const Mat out = log_mel(s, cfg);
  const Mat fb = mel_filterbank(40, 512);
  for (Eigen::Index m = 0; m < 40; ++m) {
    double row_sum = 0.0;
    for (Eigen::Index k = 0; k < 257; ++k) row_sum += fb(m, k) * 1.0;
    EXPECT_EQ(out(0, m), std::log(row_sum)) << "mel " << m;
  }
}

TEST(LogMelTest, FiniteForAnyNonNegativeInput) {
  Rng rng(4);
  Spectrogram s;
  s.mags.resize(20, 257);
  for (Eigen::Index i = 0; i < s.mags.size(); ++i) {
    const double u = rng.uniform();
    s.mags.data()[i] = u < 0.3 ? 0.0 : (u < 0.6 ? 1e-300 : 1e6 * u);
  }
  const Mat out = log_mel(s, FeatureConfig{});
  EXPECT_TRUE(out.allFinite());
  EXPECT_EQ(out.cols(), 40);
}

TEST(FrameContextTest, ZeroContextIsIdentity) {
  Rng rng(5);
  Mat mels(7, 4);
  for (Eigen::Index i = 0; i < mels.size(); ++i) mels.data()[i] = rng.normal();
  const FeatureMatrix f = frame_context(mels, 0);
  EXPECT_EQ(f.rows, mels);
}

TEST(FrameContextTest, MatchesPadAndSlideOracle) {
  Rng rng(6);
  for (std::size_t c : {1u, 2u, 5u}) {
    Mat mels(3, 4);
    for (Eigen::Index i = 0; i < mels.size(); ++i) mels.data()[i] = rng.normal();
    // oracle: explicitly padded sequence, then a sliding window
    std::vector<RowVec> padded;
    for (std::size_t i = 0; i < c; ++i) padded.push_back(mels.row(0));
    for (Eigen::Index t = 0; t < mels.rows(); ++t) padded.push_back(mels.row(t));
    for (std::size_t i = 0; i < c; ++i) padded.push_back(mels.row(mels.rows() - 1));

    const FeatureMatrix f = frame_context(mels, c);
    ASSERT_EQ(f.num_frames(), 3u);
    ASSERT_EQ(f.dim(), 4 * (2 * c + 1));
    for (Eigen::Index t = 0; t < 3; ++t)
      for (std::size_t j = 0; j < 2 * c + 1; ++j)
        EXPECT_EQ(RowVec(f.rows.block(t, static_cast<Eigen::Index>(j) * 4, 1, 4)), padded[t + j]);
  }
}

TEST(FrameContextTest, EdgeReplicationSmallCase) {
  Mat mels(3, 1);
  mels << 1.0, 2.0, 3.0;
  const FeatureMatrix f = frame_context(mels, 1);
  RowVec first(3), last(3);
  first << 1.0, 1.0, 2.0;
  last << 2.0, 3.0, 3.0;
  EXPECT_EQ(RowVec(f.rows.row(0)), first);
  EXPECT_EQ(RowVec(f.rows.row(2)), last);
}

TEST(FrameContextTest, DefaultDimensionIs440) {
  const FeatureMatrix f = frame_context(Mat::Zero(10, 40), 5);
  EXPECT_EQ(f.dim(), 440u);
  EXPECT_EQ(f.num_frames(), 10u);
  EXPECT_EQ(FeatureConfig{}.feature_dim(), 440u);
}

TEST(FrameContextTest, EmptyInputRejected) { EXPECT_THROW(frame_context(Mat(0, 40), 5), DataError); }

TEST(ExtractFeaturesTest, OneSecondClipGives61Frames) {
  const FeatureMatrix f = extract_features(noise_clip(16000, 2));
  EXPECT_EQ(f.num_frames(), 61u);
  EXPECT_EQ(f.dim(), 440u);
  EXPECT_TRUE(f.rows.allFinite());
}

TEST(ExtractFeaturesTest, WrongSampleRateRejected) {
  AudioClip c = noise_clip(16000, 2);
  c.sample_rate = 44100;
  EXPECT_THROW(extract_features(c), DataError);
}

TEST(NormStatsTest, RepeatedFrameFloorsStd) {
  Mat rows = Mat::Constant(5, 3, 2.5);
  const std::vector<Mat> parts = {rows};
  const NormStats s = fit_norm_stats(std::span<const Mat>(parts));
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(s.std(j), kStdFloor);
  apply_norm_inplace(rows, s);
  EXPECT_EQ(rows.cwiseAbs().maxCoeff(), 0.0);
}

TEST(NormStatsTest, TwoFrameOracle) {
  Mat rows(2, 2);
  rows << 1.0, -3.0, 5.0, 4.0;
  const std::vector<Mat> parts = {rows};
  const NormStats s = fit_norm_stats(std::span<const Mat>(parts));
  EXPECT_DOUBLE_EQ(s.mean(0), 3.0);
  EXPECT_DOUBLE_EQ(s.mean(1), 0.5);
  EXPECT_DOUBLE_EQ(s.std(0), 2.0);  // |5 - 1| / 2
  EXPECT_DOUBLE_EQ(s.std(1), 3.5);
}

TEST(NormStatsTest, FitSetNormalizesToZeroMeanUnitVariance) {
  Rng rng(8);
  std::vector<FeatureMatrix> parts(3);
  for (auto& p : parts) {
    p.rows.resize(50, 6);
    for (Eigen::Index i = 0; i < p.rows.size(); ++i) p.rows.data()[i] = 3.0 + 7.0 * rng.normal();
  }
  const NormStats s = fit_norm_stats(std::span<const FeatureMatrix>(parts));
  Mat all(150, 6);
  for (int i = 0; i < 3; ++i) all.middleRows(i * 50, 50) = apply_norm(parts[i], s).rows;
  const RowVec mean = all.colwise().mean();
  const RowVec var = (all.rowwise() - mean).array().square().colwise().mean();
  for (Eigen::Index j = 0; j < 6; ++j) {
    EXPECT_LE(std::abs(mean(j)), 1e-6);
    EXPECT_NEAR(var(j), 1.0, 1e-6);
  }
}

TEST(NormStatsTest, FewerThanTwoFramesRejected) {
  const std::vector<Mat> parts = {Mat::Zero(1, 3)};
  EXPECT_THROW(fit_norm_stats(std::span<const Mat>(parts)), DataError);
}

TEST(NormStatsTest, DimensionMismatchRejected) {
  const std::vector<Mat> parts = {Mat::Zero(4, 3)};
  const NormStats s = fit_norm_stats(std::span<const Mat>(parts));
  Mat wrong = Mat::Zero(2, 4);
  EXPECT_THROW(apply_norm_inplace(wrong, s), DataError);
}

TEST(MixAtAnrTest, EqualPowersGiveAnalyticGain) {
  const AudioClip a = noise_clip(8000, 3);
  Rng rng(1);
  EXPECT_NEAR(mix_at_anr(a, a, -20.0, rng).gain, 0.1, 1e-12);
  EXPECT_NEAR(mix_at_anr(a, a, 0.0, rng).gain, 1.0, 1e-12);
}

TEST(MixAtAnrTest, RemeasuredAnrWithinTenthOfDb) {
  Rng rng(11);
  const AudioClip normal = noise_clip(12000, 21, 0.2);
  AudioClip anomaly;
  anomaly.samples.resize(4000);
  for (std::size_t i = 0; i < anomaly.size(); ++i)
    anomaly.samples[i] = 0.7 * std::sin(2.0 * std::numbers::pi * 1234.0 * i / 16000.0);
  for (double anr : {-15.0, -20.0, -25.0, 3.0}) {
    const AnrMix mix = mix_at_anr(normal, anomaly, anr, rng);
    ASSERT_EQ(mix.normal_cut.size(), anomaly.size());
    ASSERT_EQ(mix.mixture.size(), anomaly.size());
    AudioClip scaled = anomaly;
    for (auto& s : scaled.samples) s *= mix.gain;
    const double measured = oracle_median_power(scaled) - oracle_median_power(mix.normal_cut);
    EXPECT_NEAR(measured, anr, 0.1);
    for (std::size_t i = 0; i < anomaly.size(); ++i)
      ASSERT_DOUBLE_EQ(mix.mixture.samples[i], mix.normal_cut.samples[i] + scaled.samples[i]);
    for (std::size_t i = 0; i < anomaly.size(); ++i)
      ASSERT_EQ(mix.normal_cut.samples[i], normal.samples[mix.cut_offset + i]);
  }
}

TEST(MixAtAnrTest, AnomalyLongerThanNormalRejected) {
  Rng rng(1);
  EXPECT_THROW(mix_at_anr(noise_clip(1000, 1), noise_clip(2000, 2), -20.0, rng), DataError);
}

TEST(AugmentGainsTest, PeaksMatchTargets) {
  AudioClip c = noise_clip(3000, 5);
  double peak = 0.0;
  for (double s : c.samples) peak = std::max(peak, std::abs(s));
  for (auto& s : c.samples) s *= 0.5 / peak;  // peak 0.5

  const auto out = augment_gains(c);
  ASSERT_EQ(out.size(), 5u);
  const std::array<double, 5> targets = {1.0, 0.5, 0.25, 0.125, 0.063};
  EXPECT_EQ(kAugmentPeaks, targets);
  for (std::size_t i = 0; i < 3000; ++i) EXPECT_NEAR(out[0].samples[i], 2.0 * c.samples[i], 1e-15);
  for (std::size_t k = 0; k < 5; ++k) {
    double p = 0.0;
    for (double s : out[k].samples) p = std::max(p, std::abs(s));
    EXPECT_NEAR(p, targets[k], 1e-6);
  }
}

TEST(AugmentGainsTest, SilentClipRejected) {
  AudioClip c;
  c.samples.assign(100, 0.0);
  EXPECT_THROW(augment_gains(c), DataError);
}

}  // namespace
}  // namespace npads
