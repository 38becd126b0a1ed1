// core/src/audio.cpp

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

#include "npads/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "npads/error.hpp"

namespace npads {

namespace {

// FFTW planning is not thread-safe; execution with fresh arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    // periodic Hann
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double magnitude(std::size_t bin) const { return std::hypot(out_[bin][0], out_[bin][1]); }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

void AudioClip::validate() const {
  if (sample_rate != kSampleRate)
    throw DataError("unsupported sample rate " + std::to_string(sample_rate) + " (expected 16000)");
  if (samples.empty()) throw DataError("empty audio clip");
}

void FeatureConfig::validate() const {
  if (n_mels < 1) throw DataError("n_mels must be >= 1");
  if (!is_power_of_two(frame_len)) throw DataError("frame_len must be a power of two");
  if (hop < 1) throw DataError("hop must be >= 1");
  if (!(eps_floor > 0.0)) throw DataError("eps_floor must be positive");
}

std::size_t frame_count(std::size_t length, std::size_t frame_len, std::size_t hop) {
  if (length < frame_len) return 0;
  return (length - frame_len) / hop + 1;
}

Spectrogram stft(const AudioClip& clip, std::size_t frame_len, std::size_t hop, Window window) {
  if (!is_power_of_two(frame_len)) throw DataError("frame_len must be a power of two");
  if (hop == 0) throw DataError("hop must be >= 1");
  if (clip.size() < frame_len) throw DataError("clip too short");

  const std::size_t frames = frame_count(clip.size(), frame_len, hop);
  const std::size_t bins = frame_len / 2 + 1;
  const std::vector<double> w = make_window(window, frame_len);

  Spectrogram spec;
  spec.frame_len = frame_len;
  spec.hop = hop;
  spec.mags.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));

  RealFft fft(frame_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = clip.samples.data() + t * hop;
    double* dst = fft.input();
    for (std::size_t i = 0; i < frame_len; ++i) dst[i] = src[i] * w[i];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k)
      spec.mags(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = fft.magnitude(k);
  }
  return spec;
}

Mat mel_filterbank(std::size_t n_mels, std::size_t frame_len, int sample_rate) {
  const std::size_t bins = frame_len / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  Mat fb = Mat::Zero(static_cast<Eigen::Index>(n_mels), static_cast<Eigen::Index>(bins));
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(frame_len);
      double weight = 0.0;
      if (f > lo && f <= center)
        weight = (f - lo) / (center - lo);
      else if (f > center && f < hi)
        weight = (hi - f) / (hi - center);
      fb(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = weight;
    }
  }
  return fb;
}

Mat log_mel(const Spectrogram& spec, const FeatureConfig& cfg) {
  const Mat fb = mel_filterbank(cfg.n_mels, spec.frame_len);
  if (static_cast<std::size_t>(fb.cols()) != spec.num_bins())
    throw DataError("spectrogram bin count does not match frame length");
  // plain ascending-bin accumulation, so results do not depend on how a
  // matrix product would block the sum
  const Eigen::Index frames = spec.mags.rows();
  const Eigen::Index bins = spec.mags.cols();
  Mat out(frames, fb.rows());
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index m = 0; m < fb.rows(); ++m) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < bins; ++k) acc += fb(m, k) * spec.mags(t, k);
      out(t, m) = std::log(std::max(acc, cfg.eps_floor));
    }
  }
  return out;
}

FeatureMatrix frame_context(const Mat& mels, std::size_t context) {
  if (mels.rows() == 0 || mels.cols() == 0) throw DataError("frame_context: empty input");
  const Eigen::Index frames = mels.rows();
  const Eigen::Index n = mels.cols();
  const Eigen::Index width = static_cast<Eigen::Index>(2 * context + 1);
  const Eigen::Index c = static_cast<Eigen::Index>(context);

  FeatureMatrix out;
  out.rows.resize(frames, n * width);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index j = 0; j < width; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t - c + j, 0, frames - 1);
      out.rows.block(t, j * n, 1, n) = mels.row(src);
    }
  }
  return out;
}

FeatureMatrix extract_features(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.validate();
  clip.validate();
  const Spectrogram spec = stft(clip, cfg.frame_len, cfg.hop, cfg.window);
  return frame_context(log_mel(spec, cfg), cfg.context);
}

namespace {

NormStats fit_norm_stats_impl(std::span<const Mat* const> parts, double std_floor) {
  Eigen::Index dim = -1;
  Eigen::Index total = 0;
  for (const Mat* m : parts) {
    if (m->rows() == 0) continue;
    if (dim < 0) dim = m->cols();
    if (m->cols() != dim) throw DataError("fit_norm_stats: inconsistent feature dimensions");
    total += m->rows();
  }
  if (total < 2) throw DataError("fit_norm_stats: need at least 2 frames");

  // two-pass for accuracy
  Vec mean = Vec::Zero(dim);
  for (const Mat* m : parts)
    if (m->rows() > 0) mean += m->colwise().sum().transpose();
  mean /= static_cast<double>(total);

  Vec var = Vec::Zero(dim);
  for (const Mat* m : parts) {
    if (m->rows() == 0) continue;
    var += (m->rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  var /= static_cast<double>(total);

  NormStats stats;
  stats.mean = mean;
  stats.std = var.array().sqrt().max(std_floor).matrix();
  return stats;
}

}  // namespace

NormStats fit_norm_stats(std::span<const FeatureMatrix> features, double std_floor) {
  std::vector<const Mat*> parts;
  parts.reserve(features.size());
  for (const auto& f : features) parts.push_back(&f.rows);
  return fit_norm_stats_impl(parts, std_floor);
}

NormStats fit_norm_stats(std::span<const Mat> features, double std_floor) {
  std::vector<const Mat*> parts;
  parts.reserve(features.size());
  for (const auto& f : features) parts.push_back(&f);
  return fit_norm_stats_impl(parts, std_floor);
}

void apply_norm_inplace(Mat& rows, const NormStats& stats) {
  if (rows.cols() != stats.mean.size() || rows.cols() != stats.std.size())
    throw DataError("apply_norm: dimension mismatch between features and stats");
  const RowVec inv = stats.std.array().inverse().matrix().transpose();
  rows.rowwise() -= stats.mean.transpose();
  rows.array().rowwise() *= inv.array();
}

FeatureMatrix apply_norm(const FeatureMatrix& features, const NormStats& stats) {
  FeatureMatrix out = features;
  apply_norm_inplace(out.rows, stats);
  out.normalized = true;
  return out;
}

std::vector<double> frame_log_power(const AudioClip& clip) {
  const Spectrogram spec = stft(clip, 512, 256, Window::Hann);
  std::vector<double> power(spec.num_frames());
  for (std::size_t t = 0; t < power.size(); ++t) {
    const double sum = spec.mags.row(static_cast<Eigen::Index>(t)).sum();
    power[t] = 20.0 * std::log10(std::max(sum, 1e-12));
  }
  return power;
}

double median_log_power(const AudioClip& clip) {
  std::vector<double> p = frame_log_power(clip);
  std::sort(p.begin(), p.end());
  const std::size_t n = p.size();
  return n % 2 == 1 ? p[n / 2] : 0.5 * (p[n / 2 - 1] + p[n / 2]);
}

AnrMix mix_at_anr(const AudioClip& normal, const AudioClip& anomaly, double anr_db, Rng& rng) {
  normal.validate();
  anomaly.validate();
  if (anomaly.size() > normal.size())
    throw DataError("mix_at_anr: anomaly longer than normal");

  AnrMix out;
  out.cut_offset = rng.index(normal.size() - anomaly.size() + 1);
  out.normal_cut.samples.assign(normal.samples.begin() + static_cast<std::ptrdiff_t>(out.cut_offset),
                                normal.samples.begin() +
                                    static_cast<std::ptrdiff_t>(out.cut_offset + anomaly.size()));

  const double p_normal = median_log_power(out.normal_cut);
  const double p_anomaly = median_log_power(anomaly);
  out.gain = std::pow(10.0, (anr_db - (p_anomaly - p_normal)) / 20.0);

  out.mixture.samples.resize(anomaly.size());
  for (std::size_t i = 0; i < anomaly.size(); ++i)
    out.mixture.samples[i] = out.normal_cut.samples[i] + out.gain * anomaly.samples[i];
  return out;
}

std::vector<AudioClip> augment_gains(const AudioClip& clip) {
  clip.validate();
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (!(peak > 0.0)) throw DataError("augment_gains: silent clip");

  std::vector<AudioClip> out;
  out.reserve(kAugmentPeaks.size());
  for (double target : kAugmentPeaks) {
    AudioClip scaled;
    scaled.sample_rate = clip.sample_rate;
    const double g = target / peak;
    scaled.samples.resize(clip.size());
    for (std::size_t i = 0; i < clip.size(); ++i) scaled.samples[i] = clip.samples[i] * g;
    out.push_back(std::move(scaled));
  }
  return out;
}

}  // namespace npads
