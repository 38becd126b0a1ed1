// tests/support/synth.hpp

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

#include <string>
#include <vector>

#include "npads/audio.hpp"
#include "npads/random.hpp"

namespace npads::testing {

// A stationary machine-like sound: a few sinusoids plus band-pass noise,
// optionally gated by a square-ish amplitude envelope.
struct SoundTemplate {
  std::string name;
  std::vector<double> tone_hz;
  std::vector<double> tone_amp;
  double noise_center_hz = 1000.0;
  double noise_q = 1.0;
  double noise_amp = 0.0;
  double gate_hz = 0.0;  // 0 = no gating
  double gate_duty = 0.5;
  double amp_jitter = 0.0;     // per-clip tone gains drawn from [1 - j, 1 + j]
  double tremolo_depth = 0.0;  // slow sinusoidal amplitude modulation
  double tremolo_hz = 0.0;
};

// Renders `seconds` of audio at 16 kHz. Each clip gets random phases and a
// +-1% frequency jitter so clips from one template are not identical.
AudioClip render(const SoundTemplate& t, double seconds, Rng& rng);

// White Gaussian noise through an RBJ band-pass biquad (0 dB peak).
std::vector<double> bandpass_noise(std::size_t n, double center_hz, double q, Rng& rng);

// The fixed corpus used by the end-to-end tests.
SoundTemplate normal_template();
std::vector<SoundTemplate> various_templates();  // 4 templates
std::vector<SoundTemplate> anomaly_templates();  // 2 held-out templates

}  // namespace npads::testing
