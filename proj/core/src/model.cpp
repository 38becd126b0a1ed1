// core/src/model.cpp

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

#include "npads/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <iterator>
#include <fstream>
#include <sstream>

#include "npads/binary_io.hpp"
#include "npads/error.hpp"
#include "npads/feature_cache.hpp"
#include "npads/objectives.hpp"

namespace npads {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

std::string serialize_body(const TrainedModel& m) {
  std::ostringstream out(std::ios::binary);
  binio::put_magic(out, "NPADSMDL");
  binio::put<std::uint32_t>(out, kModelFormatVersion);
  binio::put_string(out, m.config.to_text());
  binio::put_string(out, m.provenance);
  binio::put<std::uint64_t>(out, m.features.frame_len);
  binio::put<std::uint64_t>(out, m.features.hop);
  binio::put<std::uint64_t>(out, m.features.n_mels);
  binio::put<std::uint64_t>(out, m.features.context);
  binio::put<double>(out, m.features.eps_floor);
  binio::put<std::uint8_t>(out, m.features.window == Window::Hann ? 0 : 1);
  write_norm_stats(out, m.norm);
  write_mlp(out, m.encoder);
  write_mlp(out, m.decoder);
  write_mlp(out, m.generator);
  write_gmm(out, m.gmm);
  binio::put<double>(out, m.threshold);
  binio::put<double>(out, m.phi_z);
  binio::put<std::uint64_t>(out, m.training_scores.size());
  binio::put_doubles(out, m.training_scores.data(), m.training_scores.size());
  return std::move(out).str();
}

}  // namespace

void write_model(std::ostream& out, const TrainedModel& model) {
  const std::string body = serialize_body(model);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  binio::put<std::uint64_t>(out, fnv1a64(body));
}

TrainedModel read_model(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 + 8) throw DataError("model file too short");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), 8);
  if (fnv1a64(body) != stored) throw DataError("model file digest mismatch (corrupt or truncated)");

  std::istringstream s(std::string(body), std::ios::binary);
  binio::expect_magic(s, "NPADSMDL", "model file");
  const auto version = binio::get<std::uint32_t>(s);
  if (version != kModelFormatVersion) throw DataError("unsupported model version " + std::to_string(version));

  TrainedModel m;
  m.config = TrainConfig::from_text(binio::get_string(s));
  m.provenance = binio::get_string(s);
  m.features.frame_len = binio::get<std::uint64_t>(s);
  m.features.hop = binio::get<std::uint64_t>(s);
  m.features.n_mels = binio::get<std::uint64_t>(s);
  m.features.context = binio::get<std::uint64_t>(s);
  m.features.eps_floor = binio::get<double>(s);
  m.features.window = binio::get<std::uint8_t>(s) == 0 ? Window::Hann : Window::Rectangular;
  m.features.validate();
  m.norm = read_norm_stats(s);
  m.encoder = read_mlp(s);
  m.decoder = read_mlp(s);
  m.generator = read_mlp(s);
  m.gmm = read_gmm(s);
  m.threshold = binio::get<double>(s);
  m.phi_z = binio::get<double>(s);
  const auto n = binio::get<std::uint64_t>(s);
  if (n > (1ULL << 34)) throw DataError("model: training score count out of range");
  m.training_scores.resize(n);
  binio::get_doubles(s, m.training_scores.data(), n);

  const std::size_t q = m.encoder.input_dim();
  if (m.decoder.output_dim() != q || m.encoder.output_dim() != m.decoder.input_dim() ||
      m.generator.input_dim() != m.encoder.output_dim() || m.generator.output_dim() != q ||
      static_cast<std::size_t>(m.norm.mean.size()) != q || m.gmm.dim() != m.encoder.output_dim() ||
      m.features.feature_dim() != q)
    throw DataError("model: inconsistent dimensions");
  if (!std::isfinite(m.threshold)) throw DataError("model: non-finite threshold");
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, model);
  if (!out) throw DataError("write failed: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_model(in);
}

std::string model_digest(const TrainedModel& model) { return to_hex(fnv1a64(serialize_body(model))); }

double deployed_threshold(const TrainedModel& model, double rho_deploy) {
  if (model.training_scores.empty()) return model.threshold;
  return select_threshold(model.training_scores, rho_deploy);
}

Vec score_frames(const TrainedModel& model, const Mat& normalized_rows) {
  return anomaly_scores(model.encoder, model.decoder, normalized_rows);
}

}  // namespace npads
