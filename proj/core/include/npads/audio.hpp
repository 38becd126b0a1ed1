// core/include/npads/audio.hpp

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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "npads/matrix.hpp"
#include "npads/random.hpp"

namespace npads {

inline constexpr int kSampleRate = 16000;

// Mono audio at 16 kHz. Samples decoded from PCM16 lie in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  // Throws DataError when the rate is not 16 kHz or the clip is empty.
  void validate() const;
};

enum class Window { Hann, Rectangular };

// Magnitude spectrogram: one row per frame, frame_len/2 + 1 bins per row.
struct Spectrogram {
  Mat mags;
  std::size_t frame_len = 512;
  std::size_t hop = 256;

  std::size_t num_frames() const { return static_cast<std::size_t>(mags.rows()); }
  std::size_t num_bins() const { return static_cast<std::size_t>(mags.cols()); }
};

struct FeatureConfig {
  std::size_t frame_len = 512;
  std::size_t hop = 256;
  std::size_t n_mels = 40;
  std::size_t context = 5;
  double eps_floor = 1e-10;
  Window window = Window::Hann;

  std::size_t feature_dim() const { return n_mels * (2 * context + 1); }
  void validate() const;
};

// T frames x Q dims, where Q = n_mels * (2C + 1).
struct FeatureMatrix {
  Mat rows;
  bool normalized = false;

  std::size_t num_frames() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

struct NormStats {
  Vec mean;
  Vec std;
};

inline constexpr double kStdFloor = 1e-8;

// Number of frames produced by framing `length` samples.
std::size_t frame_count(std::size_t length, std::size_t frame_len, std::size_t hop);

// Short-time magnitude spectrum. Throws DataError("clip too short") when the
// clip holds less than one frame. frame_len must be a power of two.
Spectrogram stft(const AudioClip& clip, std::size_t frame_len = 512, std::size_t hop = 256,
                 Window window = Window::Hann);

// HTK-scale triangular filters spanning 0 Hz to Nyquist, unit peak.
// Shape: n_mels x (frame_len/2 + 1).
Mat mel_filterbank(std::size_t n_mels, std::size_t frame_len, int sample_rate = kSampleRate);

// ln(max(Mel * |X|, eps_floor)) per frame; rows = frames, cols = n_mels.
Mat log_mel(const Spectrogram& spec, const FeatureConfig& cfg);

// Stacks 2C+1 neighbouring frames around each frame, replicating the first and
// last frames at the edges so the frame count is preserved.
FeatureMatrix frame_context(const Mat& mels, std::size_t context);

// stft -> log_mel -> frame_context.
FeatureMatrix extract_features(const AudioClip& clip, const FeatureConfig& cfg = {});

NormStats fit_norm_stats(std::span<const FeatureMatrix> features, double std_floor = kStdFloor);
NormStats fit_norm_stats(std::span<const Mat> features, double std_floor = kStdFloor);
FeatureMatrix apply_norm(const FeatureMatrix& features, const NormStats& stats);
void apply_norm_inplace(Mat& rows, const NormStats& stats);

// Frame-wise log power 20*log10(sum_w |X_w|) with 512/256 framing.
std::vector<double> frame_log_power(const AudioClip& clip);
double median_log_power(const AudioClip& clip);

struct AnrMix {
  AudioClip normal_cut;
  AudioClip mixture;
  double gain = 1.0;
  std::size_t cut_offset = 0;
};

// Cuts a random segment of `normal` with the anomaly's length and adds the
// anomaly scaled so that median(P_anomaly) - median(P_normal) == anr_db.
AnrMix mix_at_anr(const AudioClip& normal, const AudioClip& anomaly, double anr_db, Rng& rng);

inline constexpr std::array<double, 5> kAugmentPeaks = {1.0, 0.5, 0.25, 0.125, 0.063};

// Five copies of `clip` whose peak absolute amplitudes equal kAugmentPeaks.
std::vector<AudioClip> augment_gains(const AudioClip& clip);

}  // namespace npads
