// core/include/npads/objectives.hpp

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
#include <span>

#include "npads/matrix.hpp"
#include "npads/mlp.hpp"

namespace npads {

inline constexpr double kCovarianceRidge = 1e-6;
inline constexpr double kSigmoidClamp = 500.0;

// ---------------------------------------------------------------------------
// Anomaly score: squared reconstruction error ||x - D(E(x))||^2.

double anomaly_score(const Mlp& encoder, const Mlp& decoder, const Eigen::Ref<const Vec>& x);

// Per-row squared error between two equally shaped matrices.
Vec squared_errors(const Mat& x, const Mat& reconstruction);

// Scores for every row of `x`, evaluated in chunks to bound memory.
Vec anomaly_scores(const Mlp& encoder, const Mlp& decoder, const Mat& x, std::size_t chunk = 4096);

// Forward pass through encoder and decoder, kept for backpropagation.
struct AutoencoderPass {
  ForwardResult encoded;
  ForwardResult decoded;
  Vec scores;
};

struct AutoencoderGrads {
  MlpGrads encoder;
  MlpGrads decoder;
};

AutoencoderPass autoencoder_forward(const Mlp& encoder, const Mlp& decoder, const Mat& x);

// Propagates d(objective)/d(score_n) back to the encoder and decoder
// parameters; x is treated as a constant.
AutoencoderGrads autoencoder_backward(const Mlp& encoder, const Mlp& decoder, const AutoencoderPass& pass,
                                      const Mat& x, const Vec& grad_scores);

// ---------------------------------------------------------------------------
// Latent Gaussian statistics and the KL constraint.

struct BatchGaussianStats {
  Vec mean;  // R
  Mat cov;   // R x R, biased covariance + ridge * I
};

// Throws DataError when fewer than two rows are given.
BatchGaussianStats batch_stats(const Mat& latents, double ridge = kCovarianceRidge);

// 0.5 * [ln|S| + tr(S^-1) + m^T S^-1 m - R], i.e. D(N(0, I) || N(m, S)).
// Throws NumericalError if the covariance is not positive definite.
double kld_to_standard(const BatchGaussianStats& stats);

struct KldGradient {
  double value = 0.0;
  Mat grad_latents;  // M x R
};

// KL value and its gradient with respect to every latent row.
KldGradient kld_gradient(const Mat& latents, double ridge = kCovarianceRidge);

// ---------------------------------------------------------------------------
// KL + reconstruction objective over a batch of various sounds.

struct KrResult {
  double kld = 0.0;
  double reconstruction = 0.0;  // summed over the batch
  double value = 0.0;
  MlpGrads encoder;
  MlpGrads generator;
};

double j_kr(const Mlp& encoder, const Mlp& generator, const Mat& batch, double ridge = kCovarianceRidge);
KrResult j_kr_with_grads(const Mlp& encoder, const Mlp& generator, const Mat& batch,
                         double ridge = kCovarianceRidge);

// ---------------------------------------------------------------------------
// Threshold rule and smoothed rates.

// Returns the max(1, floor(rho * M))-th largest score (1-based).
double select_threshold(std::span<const double> scores, double rho);

// 1-based descending rank used by select_threshold.
std::size_t threshold_rank(std::size_t count, double rho);

double sigmoid(double x);
double sigmoid_derivative(double x);

double smooth_tpr(std::span<const double> anomalous_scores, double phi);
double smooth_fpr(std::span<const double> normal_scores, double phi);

// Value plus gradient w.r.t. each score.
struct ScoreObjective {
  double value = 0.0;
  Vec grad_anomalous;
  Vec grad_normal;
};

// smooth TPR - smooth FPR at a fixed threshold (no gradient through phi).
ScoreObjective j_np(std::span<const double> anomalous_scores, std::span<const double> normal_scores, double phi);

// Mean over normal samples of TPR - FPR with the threshold set to that
// sample's score; gradients include the threshold dependence.
ScoreObjective j_auc(std::span<const double> anomalous_scores, std::span<const double> normal_scores);

}  // namespace npads
