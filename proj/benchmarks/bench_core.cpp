// benchmarks/bench_core.cpp

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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "npads/audio.hpp"
#include "npads/gmm.hpp"
#include "npads/mlp.hpp"
#include "npads/objectives.hpp"
#include "npads/sampler.hpp"

namespace {

using namespace npads;

Mat gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Encoder forward + backward on one minibatch; arg = hidden units.
void BM_EncoderForwardBackward(benchmark::State& state) {
  Rng rng(1);
  const auto dims = fnn_dims(440, static_cast<std::size_t>(state.range(0)), 3, 40);
  const Mlp net = init_mlp(dims, rng);
  const Mat x = gaussian(512, 440, rng);
  const Mat g = gaussian(512, 40, rng);
  for (auto _ : state) {
    const ForwardResult fr = forward(net, x);
    MlpGrads grads = backward(net, fr.cache, g);
    benchmark::DoNotOptimize(grads.weight.front().data());
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_AnomalyScores(benchmark::State& state) {
  Rng rng(2);
  const Mlp enc = init_mlp(fnn_dims(440, 512, 3, 40), rng);
  const Mlp dec = init_mlp(fnn_dims(40, 512, 3, 440), rng);
  const Mat x = gaussian(state.range(0), 440, rng);
  for (auto _ : state) benchmark::DoNotOptimize(anomaly_scores(enc, dec, x).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnomalyScores)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

// Feature extraction for a clip of range(0) seconds.
void BM_ExtractFeatures(benchmark::State& state) {
  Rng rng(3);
  AudioClip clip;
  clip.samples.resize(static_cast<std::size_t>(state.range(0)) * kSampleRate);
  for (std::size_t i = 0; i < clip.size(); ++i)
    clip.samples[i] = 0.3 * std::sin(2.0 * std::numbers::pi * 440.0 * i / kSampleRate) + 0.05 * rng.normal();
  const FeatureConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(clip, cfg).rows.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clip.size()));
}
BENCHMARK(BM_ExtractFeatures)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

DiagGmm random_gmm(std::size_t k, std::size_t r, Rng& rng) {
  DiagGmm g;
  g.weights = Vec::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
  g.means = gaussian(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r), rng);
  g.variances = Mat::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r), 0.5);
  return g;
}

void BM_GmmLogPdf(benchmark::State& state) {
  Rng rng(4);
  const DiagGmm g = random_gmm(16, 40, rng);
  const GmmDensity dens(g);
  const Vec z = gaussian(40, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dens.log_pdf(z));
}
BENCHMARK(BM_GmmLogPdf);

void BM_EmRefine(benchmark::State& state) {
  Rng rng(5);
  const Mat z = gaussian(state.range(0), 40, rng);
  const DiagGmm start = random_gmm(16, 40, rng);
  EmOptions opts;
  opts.max_iters = 5;
  opts.rel_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(em_refine(start, z, opts).loglik.back());
}
BENCHMARK(BM_EmRefine)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_AnomalousBatch(benchmark::State& state) {
  Rng rng(6);
  const DiagGmm g = random_gmm(16, 40, rng);
  const Mlp gen = init_mlp(fnn_dims(40, 512, 3, 440), rng);
  // roughly the 20% tail of the prior under this mixture
  Rng prior(7);
  std::vector<double> nll(4096);
  for (double& v : nll) v = -log_pdf(g, draw_standard_normal(40, prior));
  const std::vector<double> copy = nll;
  SamplerConfig cfg;
  cfg.phi_z = select_threshold(copy, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(generate_anomalous_batch(gen, g, cfg, 512, rng).inputs.data());
}
BENCHMARK(BM_AnomalousBatch)->Unit(benchmark::kMillisecond);

void BM_JAuc(benchmark::State& state) {
  Rng rng(8);
  std::vector<double> a(512), n(512);
  for (double& v : a) v = rng.normal() + 1.0;
  for (double& v : n) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(j_auc(a, n).value);
}
BENCHMARK(BM_JAuc)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
