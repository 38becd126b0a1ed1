// core/src/sampler.cpp

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

#include "npads/sampler.hpp"

#include <string>

#include "npads/error.hpp"

namespace npads {

Vec draw_standard_normal(std::size_t dim, Rng& rng) {
  Vec z(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return z;
}

LatentSample sample_anomalous_latent(const DiagGmm& gmm, const SamplerConfig& cfg, Rng& rng) {
  return sample_anomalous_latent(GmmDensity(gmm), cfg, rng);
}

LatentSample sample_anomalous_latent(const GmmDensity& density, const SamplerConfig& cfg, Rng& rng) {
  if (cfg.max_attempts < 1) throw DataError("sampler: max_attempts must be >= 1");
  LatentSample s;
  const std::size_t dim = density.dim();
  while (s.attempts < cfg.max_attempts) {
    Vec z = draw_standard_normal(dim, rng);
    ++s.attempts;
    const double nll = -density.log_pdf(z);
    if (nll > cfg.phi_z) {
      s.z = std::move(z);
      s.neg_log_likelihood = nll;
      return s;
    }
  }
  throw RejectionBudgetExhausted();
}

AnomalousBatch generate_anomalous_batch(const Mlp& generator, const DiagGmm& gmm, const SamplerConfig& cfg,
                                        std::size_t count, Rng& rng) {
  if (generator.input_dim() != gmm.dim())
    throw DataError("generate_anomalous_batch: generator input dim " + std::to_string(generator.input_dim()) +
                    " does not match latent dim " + std::to_string(gmm.dim()));
  AnomalousBatch batch;
  const GmmDensity density(gmm);
  batch.latents.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(gmm.dim()));
  for (std::size_t n = 0; n < count; ++n) {
    LatentSample s = sample_anomalous_latent(density, cfg, rng);
    batch.attempts += s.attempts;
    batch.latents.row(static_cast<Eigen::Index>(n)) = s.z.transpose();
  }
  if (count == 0) {
    batch.inputs.resize(0, static_cast<Eigen::Index>(generator.output_dim()));
    return batch;
  }
  batch.inputs = predict(generator, batch.latents);
  return batch;
}

}  // namespace npads
