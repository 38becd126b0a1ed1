// core/include/npads/wav.hpp

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
#include <iosfwd>

#include "npads/audio.hpp"

namespace npads {

// RIFF/WAVE, PCM 16-bit, mono, 16 kHz. Anything else is a DataError.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip read_wav(std::istream& in);

// Samples are clamped to [-1, 1] and rounded to PCM16.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);
void write_wav(std::ostream& out, const AudioClip& clip);

}  // namespace npads
