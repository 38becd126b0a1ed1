// core/include/npads/mlp.hpp

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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "npads/matrix.hpp"
#include "npads/random.hpp"

namespace npads {

enum class Activation : std::uint8_t { Linear = 0, Relu = 1 };

struct Layer {
  Mat weight;  // out x in
  Vec bias;    // out
  Activation activation = Activation::Linear;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

// Feedforward network of affine layers. Encoder, decoder and generator are
// all instances of this type.
//
// The revision counter advances whenever parameters are mutated through the
// class interface; forward caches record it so that backward can reject a
// cache produced before the last update.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers);

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_parameters() const;

  const Layer& layer(std::size_t i) const { return layers_[i]; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Mutable access bumps the revision.
  Layer& mutable_layer(std::size_t i) {
    ++revision_;
    return layers_[i];
  }
  std::uint64_t revision() const { return revision_; }

  // Parameter equality (revision is bookkeeping, not state).
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<Layer> layers_;
  std::uint64_t revision_ = 0;
};

struct ForwardCache {
  std::vector<Mat> inputs;   // input to each layer
  std::vector<Mat> preacts;  // affine output of each layer
  std::uint64_t revision = 0;
};

struct ForwardResult {
  Mat output;
  ForwardCache cache;
};

// Batch rows are samples. Throws DataError on a dimension mismatch.
ForwardResult forward(const Mlp& net, const Mat& batch);

// Forward pass without keeping a cache.
Mat predict(const Mlp& net, const Mat& batch);

struct MlpGrads {
  std::vector<Mat> weight;
  std::vector<Vec> bias;
  Mat input;  // d loss / d batch

  static MlpGrads zeros_like(const Mlp& net);
  MlpGrads& operator+=(const MlpGrads& other);
};

// Gradients of a scalar loss whose gradient w.r.t. the network output is
// `grad_output`. Throws if the cache is stale or shapes do not match.
MlpGrads backward(const Mlp& net, const ForwardCache& cache, const Mat& grad_output);

// Adam with L2 weight decay folded into the gradient.
struct AdamConfig {
  double lr = 1e-4;
  double l2 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class Direction { Descend, Ascend };

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Mlp& net);

  std::int64_t step() const { return step_; }

 private:
  friend void adam_step(Mlp&, const MlpGrads&, AdamState&, const AdamConfig&, Direction);
  std::vector<Mat> m_weight_, v_weight_;
  std::vector<Vec> m_bias_, v_bias_;
  std::int64_t step_ = 0;
};

// One Adam update on a flat parameter block. `t` is the 1-based step number.
// Ascend negates the gradient before weight decay is added.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::int64_t t, const AdamConfig& cfg, Direction dir);

// Throws NumericalError naming the offending block if any gradient is
// non-finite; in that case no parameter is modified.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, const AdamConfig& cfg, Direction dir);

// Glorot-uniform weights, zero biases. Hidden layers ReLU, last layer Linear.
Mlp init_mlp(std::span<const std::size_t> dims, Rng& rng);
Mlp init_mlp(std::span<const std::size_t> dims, std::span<const Activation> activations, Rng& rng);

// Dims for an FNN: in -> hidden x layers -> out.
std::vector<std::size_t> fnn_dims(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out);

// Binary block: "NPADS", u32 version, u32 layer count, then per layer
// u32 in, u32 out, u8 activation, W (out*in f64 row-major), b (out f64).
inline constexpr std::uint32_t kMlpFormatVersion = 1;
void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);

}  // namespace npads
