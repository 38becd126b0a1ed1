// core/src/mlp.cpp

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

#include "npads/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "npads/binary_io.hpp"
#include "npads/error.hpp"

namespace npads {

namespace {

void apply_activation(Mat& m, Activation act) {
  if (act == Activation::Relu) m = m.cwiseMax(0.0);
}

std::string block_name(std::size_t layer, bool weight) {
  return "layer " + std::to_string(layer) + (weight ? " weights" : " biases");
}

bool all_finite(const double* p, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (static_cast<std::size_t>(l.bias.size()) != l.out_dim())
      throw DataError("mlp: bias size mismatch at layer " + std::to_string(i));
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim())
      throw DataError("mlp: layer dims do not chain at layer " + std::to_string(i));
  }
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const Layer& x = a.layers_[i];
    const Layer& y = b.layers_[i];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.bias.size() != y.bias.size())
      return false;
    if (x.weight != y.weight || x.bias != y.bias) return false;
  }
  return true;
}

ForwardResult forward(const Mlp& net, const Mat& batch) {
  if (net.num_layers() == 0) throw DataError("forward: empty network");
  if (static_cast<std::size_t>(batch.cols()) != net.input_dim())
    throw DataError("forward: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                    std::to_string(net.input_dim()));
  ForwardResult r;
  r.cache.revision = net.revision();
  r.cache.inputs.reserve(net.num_layers());
  r.cache.preacts.reserve(net.num_layers());
  Mat x = batch;
  for (const Layer& l : net.layers()) {
    Mat pre = x * l.weight.transpose();
    pre.rowwise() += l.bias.transpose();
    r.cache.inputs.push_back(std::move(x));
    x = pre;
    apply_activation(x, l.activation);
    r.cache.preacts.push_back(std::move(pre));
  }
  r.output = std::move(x);
  return r;
}

Mat predict(const Mlp& net, const Mat& batch) {
  if (net.num_layers() == 0) throw DataError("predict: empty network");
  if (static_cast<std::size_t>(batch.cols()) != net.input_dim())
    throw DataError("predict: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                    std::to_string(net.input_dim()));
  Mat x = batch;
  for (const Layer& l : net.layers()) {
    Mat pre = x * l.weight.transpose();
    pre.rowwise() += l.bias.transpose();
    apply_activation(pre, l.activation);
    x = std::move(pre);
  }
  return x;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const Layer& l : net.layers()) {
    g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vec::Zero(l.bias.size()));
  }
  return g;
}

MlpGrads& MlpGrads::operator+=(const MlpGrads& other) {
  if (weight.size() != other.weight.size()) throw DataError("MlpGrads: layer count mismatch");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

MlpGrads backward(const Mlp& net, const ForwardCache& cache, const Mat& grad_output) {
  if (cache.revision != net.revision() || cache.inputs.size() != net.num_layers())
    throw DataError("backward: stale forward cache");
  const std::size_t n = net.num_layers();
  const Eigen::Index batch = cache.inputs.front().rows();
  if (grad_output.rows() != batch || static_cast<std::size_t>(grad_output.cols()) != net.output_dim())
    throw DataError("backward: grad_output shape mismatch");

  MlpGrads g;
  g.weight.resize(n);
  g.bias.resize(n);
  Mat delta = grad_output;
  for (std::size_t k = n; k-- > 0;) {
    const Layer& l = net.layer(k);
    if (l.activation == Activation::Relu)
      delta = delta.cwiseProduct((cache.preacts[k].array() > 0.0).cast<double>().matrix());
    g.weight[k] = delta.transpose() * cache.inputs[k];
    g.bias[k] = delta.colwise().sum().transpose();
    delta = delta * l.weight;
  }
  g.input = std::move(delta);
  return g;
}

AdamState::AdamState(const Mlp& net) {
  for (const Layer& l : net.layers()) {
    m_weight_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    v_weight_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    m_bias_.push_back(Vec::Zero(l.bias.size()));
    v_bias_.push_back(Vec::Zero(l.bias.size()));
  }
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::int64_t t, const AdamConfig& cfg, Direction dir) {
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size())
    throw DataError("adam_update: shape mismatch");
  const double sign = dir == Direction::Ascend ? -1.0 : 1.0;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = sign * grads[i] + cfg.l2 * params[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, const AdamConfig& cfg, Direction dir) {
  const std::size_t n = net.num_layers();
  if (grads.weight.size() != n || grads.bias.size() != n || state.m_weight_.size() != n)
    throw DataError("adam_step: layer count mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    const Layer& l = net.layer(k);
    if (grads.weight[k].rows() != l.weight.rows() || grads.weight[k].cols() != l.weight.cols() ||
        grads.bias[k].size() != l.bias.size())
      throw DataError("adam_step: gradient shape mismatch at layer " + std::to_string(k));
    if (!all_finite(grads.weight[k].data(), grads.weight[k].size()))
      throw NumericalError("adam_step: non-finite gradient in " + block_name(k, true));
    if (!all_finite(grads.bias[k].data(), grads.bias[k].size()))
      throw NumericalError("adam_step: non-finite gradient in " + block_name(k, false));
  }

  ++state.step_;
  for (std::size_t k = 0; k < n; ++k) {
    Layer& l = net.mutable_layer(k);
    auto span_of = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
    auto cspan_of = [](const auto& m) {
      return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
    };
    adam_update(span_of(l.weight), cspan_of(grads.weight[k]), span_of(state.m_weight_[k]),
                span_of(state.v_weight_[k]), state.step_, cfg, dir);
    adam_update(span_of(l.bias), cspan_of(grads.bias[k]), span_of(state.m_bias_[k]), span_of(state.v_bias_[k]),
                state.step_, cfg, dir);
  }
}

Mlp init_mlp(std::span<const std::size_t> dims, std::span<const Activation> activations, Rng& rng) {
  if (dims.size() < 2) throw DataError("init_mlp: need at least input and output dims");
  if (activations.size() != dims.size() - 1) throw DataError("init_mlp: one activation per layer required");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t in = dims[k], out = dims[k + 1];
    if (in == 0 || out == 0) throw DataError("init_mlp: zero-width layer");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer l;
    l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
    l.bias = Vec::Zero(static_cast<Eigen::Index>(out));
    l.activation = activations[k];
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

Mlp init_mlp(std::span<const std::size_t> dims, Rng& rng) {
  if (dims.size() < 2) throw DataError("init_mlp: need at least input and output dims");
  std::vector<Activation> acts(dims.size() - 1, Activation::Relu);
  acts.back() = Activation::Linear;
  return init_mlp(dims, acts, rng);
}

std::vector<std::size_t> fnn_dims(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out) {
  std::vector<std::size_t> dims{in};
  for (std::size_t i = 0; i < hidden_layers; ++i) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}

void write_mlp(std::ostream& out, const Mlp& net) {
  binio::put_magic(out, "NPADS");
  binio::put<std::uint32_t>(out, kMlpFormatVersion);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(net.num_layers()));
  for (const Layer& l : net.layers()) {
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_dim()));
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_dim()));
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
    binio::put_doubles(out, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    binio::put_doubles(out, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

Mlp read_mlp(std::istream& in) {
  binio::expect_magic(in, "NPADS", "network block");
  const auto version = binio::get<std::uint32_t>(in);
  if (version != kMlpFormatVersion) throw DataError("unsupported network block version " + std::to_string(version));
  const auto count = binio::get<std::uint32_t>(in);
  if (count > 1024) throw DataError("network block: implausible layer count");
  std::vector<Layer> layers;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto in_dim = binio::get<std::uint32_t>(in);
    const auto out_dim = binio::get<std::uint32_t>(in);
    const auto act = binio::get<std::uint8_t>(in);
    if (act > 1) throw DataError("network block: unknown activation tag");
    if (in_dim == 0 || out_dim == 0 || in_dim > (1u << 20) || out_dim > (1u << 20))
      throw DataError("network block: layer dims out of range");
    Layer l;
    l.activation = static_cast<Activation>(act);
    l.weight.resize(out_dim, in_dim);
    binio::get_doubles(in, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    l.bias.resize(out_dim);
    binio::get_doubles(in, l.bias.data(), out_dim);
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

}  // namespace npads
