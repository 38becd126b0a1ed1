// core/src/objectives.cpp

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

#include "npads/objectives.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "npads/error.hpp"

namespace npads {

double anomaly_score(const Mlp& encoder, const Mlp& decoder, const Eigen::Ref<const Vec>& x) {
  const Mat row = x.transpose();
  return anomaly_scores(encoder, decoder, row)(0);
}

Vec squared_errors(const Mat& x, const Mat& reconstruction) {
  if (x.rows() != reconstruction.rows() || x.cols() != reconstruction.cols())
    throw DataError("squared_errors: shape mismatch");
  return (x - reconstruction).rowwise().squaredNorm();
}

Vec anomaly_scores(const Mlp& encoder, const Mlp& decoder, const Mat& x, std::size_t chunk) {
  if (encoder.output_dim() != decoder.input_dim() || decoder.output_dim() != encoder.input_dim())
    throw DataError("anomaly_scores: encoder/decoder dims do not chain");
  Vec out(x.rows());
  const Eigen::Index step = static_cast<Eigen::Index>(std::max<std::size_t>(chunk, 1));
  for (Eigen::Index start = 0; start < x.rows(); start += step) {
    const Eigen::Index n = std::min(step, x.rows() - start);
    const Mat block = x.middleRows(start, n);
    out.segment(start, n) = squared_errors(block, predict(decoder, predict(encoder, block)));
  }
  return out;
}

AutoencoderPass autoencoder_forward(const Mlp& encoder, const Mlp& decoder, const Mat& x) {
  if (encoder.output_dim() != decoder.input_dim() || decoder.output_dim() != encoder.input_dim())
    throw DataError("autoencoder_forward: encoder/decoder dims do not chain");
  AutoencoderPass pass;
  pass.encoded = forward(encoder, x);
  pass.decoded = forward(decoder, pass.encoded.output);
  pass.scores = squared_errors(x, pass.decoded.output);
  return pass;
}

AutoencoderGrads autoencoder_backward(const Mlp& encoder, const Mlp& decoder, const AutoencoderPass& pass,
                                      const Mat& x, const Vec& grad_scores) {
  if (grad_scores.size() != x.rows()) throw DataError("autoencoder_backward: gradient length mismatch");
  // dA/d(recon) = 2 (recon - x)
  const Mat grad_recon = 2.0 * ((pass.decoded.output - x).array().colwise() * grad_scores.array()).matrix();
  AutoencoderGrads g;
  g.decoder = backward(decoder, pass.decoded.cache, grad_recon);
  g.encoder = backward(encoder, pass.encoded.cache, g.decoder.input);
  return g;
}

BatchGaussianStats batch_stats(const Mat& latents, double ridge) {
  const Eigen::Index m = latents.rows();
  if (m < 2) throw DataError("batch_stats: need at least 2 latent vectors");
  BatchGaussianStats s;
  s.mean = latents.colwise().mean().transpose();
  const Mat centered = latents.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(m);
  s.cov.diagonal().array() += ridge;
  return s;
}

namespace {

struct KldParts {
  double value;
  Mat precision;
};

KldParts kld_parts(const Vec& mean, const Mat& cov) {
  const Eigen::Index r = mean.size();
  if (cov.rows() != r || cov.cols() != r) throw DataError("kld: covariance shape mismatch");
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("kld: covariance is not positive definite");
  const Mat lmat = llt.matrixL();
  const double log_det = 2.0 * lmat.diagonal().array().log().sum();
  KldParts p;
  p.precision = llt.solve(Mat::Identity(r, r));
  const double trace = p.precision.trace();
  const double quad = mean.dot(llt.solve(mean));
  p.value = 0.5 * (log_det + trace + quad - static_cast<double>(r));
  if (!std::isfinite(p.value)) throw NumericalError("kld: non-finite value");
  return p;
}

}  // namespace

double kld_to_standard(const BatchGaussianStats& stats) { return kld_parts(stats.mean, stats.cov).value; }

KldGradient kld_gradient(const Mat& latents, double ridge) {
  const BatchGaussianStats stats = batch_stats(latents, ridge);
  const KldParts parts = kld_parts(stats.mean, stats.cov);
  const Mat& p = parts.precision;
  const Vec pm = p * stats.mean;
  // dK/dS = 0.5 (P - P P - P m m^T P)
  Mat grad_cov = 0.5 * (p - p * p - pm * pm.transpose());
  grad_cov = 0.5 * (grad_cov + grad_cov.transpose());

  const double inv_m = 1.0 / static_cast<double>(latents.rows());
  const Mat centered = latents.rowwise() - stats.mean.transpose();
  KldGradient g;
  g.value = parts.value;
  g.grad_latents = (2.0 * inv_m) * centered * grad_cov;
  g.grad_latents.rowwise() += (inv_m * pm).transpose();
  return g;
}

double j_kr(const Mlp& encoder, const Mlp& generator, const Mat& batch, double ridge) {
  if (batch.rows() == 0) throw DataError("j_kr: empty batch");
  const Mat z = predict(encoder, batch);
  const double kld = kld_to_standard(batch_stats(z, ridge));
  return kld + squared_errors(batch, predict(generator, z)).sum();
}

KrResult j_kr_with_grads(const Mlp& encoder, const Mlp& generator, const Mat& batch, double ridge) {
  if (batch.rows() == 0) throw DataError("j_kr: empty batch");
  if (generator.input_dim() != encoder.output_dim() || generator.output_dim() != encoder.input_dim())
    throw DataError("j_kr: encoder/generator dims do not chain");
  const ForwardResult enc = forward(encoder, batch);
  const ForwardResult gen = forward(generator, enc.output);

  KrResult r;
  const KldGradient kld = kld_gradient(enc.output, ridge);
  r.kld = kld.value;
  r.reconstruction = squared_errors(batch, gen.output).sum();
  r.value = r.kld + r.reconstruction;

  r.generator = backward(generator, gen.cache, 2.0 * (gen.output - batch));
  const Mat grad_latents = r.generator.input + kld.grad_latents;
  r.encoder = backward(encoder, enc.cache, grad_latents);
  return r;
}

std::size_t threshold_rank(std::size_t count, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DataError("threshold rank: rho must lie in (0, 1)");
  // small slack so that e.g. 0.29 * 100 lands on 29
  const auto k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(count) + 1e-9));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(count, 1));
}

double select_threshold(std::span<const double> scores, double rho) {
  if (scores.empty()) throw DataError("select_threshold: empty scores");
  const std::size_t k = threshold_rank(scores.size(), rho);
  std::vector<double> v(scores.begin(), scores.end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(), std::greater<>());
  return v[k - 1];
}

double sigmoid(double x) {
  const double c = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-c));
}

double sigmoid_derivative(double x) {
  if (x > kSigmoidClamp || x < -kSigmoidClamp) return 0.0;
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

namespace {

double mean_sigmoid(std::span<const double> scores, double phi) {
  if (scores.empty()) throw DataError("smoothed rate: empty scores");
  double acc = 0.0;
  for (double s : scores) acc += sigmoid(s - phi);
  return acc / static_cast<double>(scores.size());
}

}  // namespace

double smooth_tpr(std::span<const double> anomalous_scores, double phi) { return mean_sigmoid(anomalous_scores, phi); }
double smooth_fpr(std::span<const double> normal_scores, double phi) { return mean_sigmoid(normal_scores, phi); }

ScoreObjective j_np(std::span<const double> anomalous_scores, std::span<const double> normal_scores, double phi) {
  if (anomalous_scores.empty() || normal_scores.empty()) throw DataError("j_np: empty batch");
  const double inv_a = 1.0 / static_cast<double>(anomalous_scores.size());
  const double inv_u = 1.0 / static_cast<double>(normal_scores.size());
  ScoreObjective r;
  r.grad_anomalous.resize(static_cast<Eigen::Index>(anomalous_scores.size()));
  r.grad_normal.resize(static_cast<Eigen::Index>(normal_scores.size()));
  double tpr = 0.0, fpr = 0.0;
  for (std::size_t n = 0; n < anomalous_scores.size(); ++n) {
    const double d = anomalous_scores[n] - phi;
    tpr += sigmoid(d);
    r.grad_anomalous(static_cast<Eigen::Index>(n)) = inv_a * sigmoid_derivative(d);
  }
  for (std::size_t n = 0; n < normal_scores.size(); ++n) {
    const double d = normal_scores[n] - phi;
    fpr += sigmoid(d);
    r.grad_normal(static_cast<Eigen::Index>(n)) = -inv_u * sigmoid_derivative(d);
  }
  r.value = tpr * inv_a - fpr * inv_u;
  return r;
}

ScoreObjective j_auc(std::span<const double> anomalous_scores, std::span<const double> normal_scores) {
  if (anomalous_scores.empty() || normal_scores.empty()) throw DataError("j_auc: empty batch");
  const std::size_t ma = anomalous_scores.size();
  const std::size_t mu = normal_scores.size();
  const double inv_outer = 1.0 / static_cast<double>(mu);
  const double inv_a = 1.0 / static_cast<double>(ma);
  const double inv_u = 1.0 / static_cast<double>(mu);

  ScoreObjective r;
  r.grad_anomalous = Vec::Zero(static_cast<Eigen::Index>(ma));
  r.grad_normal = Vec::Zero(static_cast<Eigen::Index>(mu));
  double value = 0.0;
  for (std::size_t n = 0; n < mu; ++n) {
    const double phi = normal_scores[n];
    double tpr = 0.0, fpr = 0.0;
    for (std::size_t m = 0; m < ma; ++m) {
      const double d = anomalous_scores[m] - phi;
      tpr += sigmoid(d);
      const double g = inv_outer * inv_a * sigmoid_derivative(d);
      r.grad_anomalous(static_cast<Eigen::Index>(m)) += g;
      r.grad_normal(static_cast<Eigen::Index>(n)) -= g;
    }
    for (std::size_t m = 0; m < mu; ++m) {
      const double d = normal_scores[m] - phi;
      fpr += sigmoid(d);
      const double g = inv_outer * inv_u * sigmoid_derivative(d);
      r.grad_normal(static_cast<Eigen::Index>(m)) -= g;
      r.grad_normal(static_cast<Eigen::Index>(n)) += g;
    }
    value += tpr * inv_a - fpr * inv_u;
  }
  r.value = value * inv_outer;
  return r;
}

}  // namespace npads
