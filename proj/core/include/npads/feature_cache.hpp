// core/include/npads/feature_cache.hpp

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

#include <filesystem>
#include <string>
#include <vector>

#include "npads/audio.hpp"
#include "npads/matrix.hpp"

namespace npads {

// Binary feature cache:
//   char[4] "NPFC", u32 version (1), u64 T, u64 Q, then T*Q float32 row-major.
inline constexpr std::uint32_t kFeatureCacheVersion = 1;

void write_feature_cache(const std::filesystem::path& path, const Mat& rows);
Mat read_feature_cache(const std::filesystem::path& path);

// Debug export: one row per line, comma-separated, %.9g.
void write_feature_csv(const std::filesystem::path& path, const Mat& rows);

// Per-file frame index written next to a cache: "path,first_frame,num_frames".
struct FrameIndexEntry {
  std::string source;
  std::size_t first_frame = 0;
  std::size_t num_frames = 0;
};
void write_frame_index(const std::filesystem::path& path, const std::vector<FrameIndexEntry>& entries);
std::vector<FrameIndexEntry> read_frame_index(const std::filesystem::path& path);

// Normalization stats: char[4] "NPNS", u32 version, mean vector, std vector (f64).
void write_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(const std::filesystem::path& path);
void write_norm_stats(std::ostream& out, const NormStats& stats);
NormStats read_norm_stats(std::istream& in);

}  // namespace npads
