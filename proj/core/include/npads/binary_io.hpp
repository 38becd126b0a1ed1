// core/include/npads/binary_io.hpp

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

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "npads/error.hpp"
#include "npads/matrix.hpp"

// Little-endian raw binary helpers shared by the on-disk formats.
namespace npads::binio {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian hosts");

template <typename T>
void put(std::ostream& out, const T& v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("unexpected end of file");
  return v;
}

inline void put_doubles(std::ostream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void get_doubles(std::istream& in, double* data, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double))))
    throw DataError("unexpected end of file");
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic, std::string_view what) {
  std::string buf(magic.size(), '\0');
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size())) || buf != magic)
    throw DataError(std::string("bad magic: not a ") + std::string(what));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ULL << 30)) throw DataError("string field too large");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("unexpected end of file");
  return s;
}

inline void put_vec(std::ostream& out, const Vec& v) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  put_doubles(out, v.data(), static_cast<std::size_t>(v.size()));
}

inline Vec get_vec(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw DataError("vector field too large");
  Vec v(static_cast<Eigen::Index>(n));
  get_doubles(in, v.data(), n);
  return v;
}

}  // namespace npads::binio
