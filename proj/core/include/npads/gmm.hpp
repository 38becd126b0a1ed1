// core/include/npads/gmm.hpp

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
#include <iosfwd>
#include <vector>

#include "npads/matrix.hpp"
#include "npads/random.hpp"

namespace npads {

inline constexpr double kGmmVarianceFloor = 1e-6;

// Diagonal-covariance Gaussian mixture over R-dimensional latent vectors.
struct DiagGmm {
  Vec weights;    // K, on the simplex
  Mat means;      // K x R
  Mat variances;  // K x R, diagonal of each covariance

  std::size_t num_components() const { return static_cast<std::size_t>(weights.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }

  // Throws DataError when shapes disagree, weights leave the simplex
  // (tolerance 1e-9), or a variance is below the floor.
  void validate(double variance_floor = kGmmVarianceFloor) const;
};

// ln p(z) via log-sum-exp over components.
double log_pdf(const DiagGmm& gmm, const Eigen::Ref<const Vec>& z);

// ln p(z_n) for each row of `latents`.
Vec log_pdf_rows(const DiagGmm& gmm, const Mat& latents);

// Mixture density with the per-component normalizers and inverse variances
// precomputed, for many single-point evaluations against one mixture.
class GmmDensity {
 public:
  explicit GmmDensity(const DiagGmm& gmm);

  std::size_t dim() const { return static_cast<std::size_t>(means_.cols()); }
  double log_pdf(const Eigen::Ref<const Vec>& z) const;

 private:
  Vec consts_;
  Mat means_;
  Mat inv_var_;
};

struct EmOptions {
  int max_iters = 20;
  double rel_tol = 1e-6;
  double variance_floor = kGmmVarianceFloor;
};

struct EmResult {
  DiagGmm gmm;
  // Mean per-sample log-likelihood: entry 0 is the starting point, entry i the
  // value after the i-th EM iteration.
  std::vector<double> loglik;
  int iterations = 0;
  int reseeded = 0;  // empty components reseeded
};

// k-means++ seeding followed by EM. Throws DataError when N < K.
EmResult em_fit(const Mat& latents, std::size_t num_components, const EmOptions& opts, Rng& rng);

// EM iterations starting from an existing mixture.
EmResult em_refine(const DiagGmm& start, const Mat& latents, const EmOptions& opts);

// Serialized as u64 K, u64 R, weights, means, variances (f64).
void write_gmm(std::ostream& out, const DiagGmm& gmm);
DiagGmm read_gmm(std::istream& in);

}  // namespace npads
