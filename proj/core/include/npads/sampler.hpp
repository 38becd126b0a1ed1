// core/include/npads/sampler.hpp

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
#include <limits>

#include "npads/gmm.hpp"
#include "npads/matrix.hpp"
#include "npads/mlp.hpp"
#include "npads/random.hpp"

namespace npads {

// Rejection sampling of latent vectors that the normal-sound mixture finds
// unlikely: candidates come from N(0, I) and are accepted when
// -ln p(z | gmm) > phi_z.
struct SamplerConfig {
  double phi_z = -std::numeric_limits<double>::infinity();
  std::size_t max_attempts = 10000;  // per accepted sample
};

// i.i.d. standard normal coordinates (Box-Muller over the seeded generator).
Vec draw_standard_normal(std::size_t dim, Rng& rng);

struct LatentSample {
  Vec z;
  double neg_log_likelihood = 0.0;
  std::size_t attempts = 0;
};

// Throws RejectionBudgetExhausted after cfg.max_attempts rejected candidates.
LatentSample sample_anomalous_latent(const DiagGmm& gmm, const SamplerConfig& cfg, Rng& rng);
LatentSample sample_anomalous_latent(const GmmDensity& density, const SamplerConfig& cfg, Rng& rng);

struct AnomalousBatch {
  Mat latents;  // M x R, every row accepted
  Mat inputs;   // M x Q, generator output
  std::size_t attempts = 0;

  double acceptance_rate() const {
    return attempts == 0 ? 1.0 : static_cast<double>(latents.rows()) / static_cast<double>(attempts);
  }
};

// Draws `count` accepted latents and decodes them with the generator.
AnomalousBatch generate_anomalous_batch(const Mlp& generator, const DiagGmm& gmm, const SamplerConfig& cfg,
                                        std::size_t count, Rng& rng);

}  // namespace npads
