// core/src/feature_cache.cpp

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

#include "npads/feature_cache.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "npads/binary_io.hpp"
#include "npads/error.hpp"

namespace npads {

void write_feature_cache(const std::filesystem::path& path, const Mat& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  binio::put_magic(out, "NPFC");
  binio::put<std::uint32_t>(out, kFeatureCacheVersion);
  binio::put<std::uint64_t>(out, static_cast<std::uint64_t>(rows.rows()));
  binio::put<std::uint64_t>(out, static_cast<std::uint64_t>(rows.cols()));
  std::vector<float> buf(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[static_cast<std::size_t>(c)] = static_cast<float>(rows(r, c));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Mat read_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  binio::expect_magic(in, "NPFC", "feature cache");
  const auto version = binio::get<std::uint32_t>(in);
  if (version != kFeatureCacheVersion)
    throw DataError("unsupported feature cache version " + std::to_string(version));
  const auto frames = binio::get<std::uint64_t>(in);
  const auto dim = binio::get<std::uint64_t>(in);
  if (frames > (1ULL << 32) || dim > (1ULL << 20)) throw DataError("feature cache header out of range");

  Mat rows(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(dim));
  std::vector<float> buf(dim);
  for (std::uint64_t r = 0; r < frames; ++r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim * sizeof(float))))
      throw DataError(path.string() + ": truncated feature cache");
    for (std::uint64_t c = 0; c < dim; ++c) {
      if (!std::isfinite(buf[c])) throw DataError(path.string() + ": non-finite feature value");
      rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[c];
    }
  }
  return rows;
}

void write_feature_csv(const std::filesystem::path& path, const Mat& rows) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw DataError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      std::fprintf(f, c == 0 ? "%.9g" : ",%.9g", rows(r, c));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void write_frame_index(const std::filesystem::path& path, const std::vector<FrameIndexEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "path,first_frame,num_frames\n";
  for (const auto& e : entries) out << e.source << ',' << e.first_frame << ',' << e.num_frames << '\n';
}

std::vector<FrameIndexEntry> read_frame_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<FrameIndexEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c2 = line.rfind(',');
    const auto c1 = line.rfind(',', c2 - 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw DataError("malformed frame index line");
    FrameIndexEntry e;
    e.source = line.substr(0, c1);
    e.first_frame = std::stoull(line.substr(c1 + 1, c2 - c1 - 1));
    e.num_frames = std::stoull(line.substr(c2 + 1));
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_norm_stats(std::ostream& out, const NormStats& stats) {
  binio::put_magic(out, "NPNS");
  binio::put<std::uint32_t>(out, 1);
  binio::put_vec(out, stats.mean);
  binio::put_vec(out, stats.std);
}

NormStats read_norm_stats(std::istream& in) {
  binio::expect_magic(in, "NPNS", "normalization stats block");
  const auto version = binio::get<std::uint32_t>(in);
  if (version != 1) throw DataError("unsupported norm stats version");
  NormStats stats;
  stats.mean = binio::get_vec(in);
  stats.std = binio::get_vec(in);
  if (stats.mean.size() != stats.std.size()) throw DataError("norm stats: mean/std size mismatch");
  if ((stats.std.array() <= 0.0).any()) throw DataError("norm stats: non-positive std");
  return stats;
}

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_norm_stats(out, stats);
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_norm_stats(in);
}

}  // namespace npads
