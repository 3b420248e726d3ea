#pragma once

// CCRM container: a tiny little-endian float32 array file.
//
//   offset 0  "CCRM"
//          4  u8 version = 1
//          5  u8 dtype   = 0 (f32 LE)
//          6  u8 ndim    (2 or 3)
//          7  u8 reserved = 0
//          8  ndim x u32 LE dims, slowest-varying first
//          .. product(dims) x f32 LE, row-major

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "ccrm/core.hpp"

namespace ccrm {

struct ArrayFile {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  friend bool operator==(const ArrayFile &, const ArrayFile &) = default;
};

inline constexpr std::array<char, 4> kContainerMagic{'C', 'C', 'R', 'M'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

namespace detail {

inline void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

inline std::vector<std::uint8_t> encode_container(const ArrayFile &arr) {
  if (arr.dims.size() != 2 && arr.dims.size() != 3) throw InvalidArgument("container: ndim must be 2 or 3");
  if (arr.values.size() != arr.element_count()) throw InvalidArgument("container: payload length does not match dims");
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * arr.dims.size() + 4 * arr.values.size());
  for (char c : kContainerMagic) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kContainerVersion);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(arr.dims.size()));
  out.push_back(0);
  for (auto d : arr.dims) detail::put_u32(out, d);
  for (float v : arr.values) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline ArrayFile decode_container(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 8) throw InvalidArgument("container: truncated header");
  for (std::size_t i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kContainerMagic[i])) throw InvalidArgument("container: bad magic");
  if (bytes[4] != kContainerVersion) throw InvalidArgument("container: unsupported version");
  if (bytes[5] != kDtypeF32) throw InvalidArgument("container: unsupported dtype");
  const std::size_t ndim = bytes[6];
  if (ndim != 2 && ndim != 3) throw InvalidArgument("container: ndim must be 2 or 3");
  if (bytes.size() < 8 + 4 * ndim) throw InvalidArgument("container: truncated dims");
  ArrayFile arr;
  for (std::size_t i = 0; i < ndim; ++i) arr.dims.push_back(detail::get_u32(&bytes[8 + 4 * i]));
  const std::size_t n = arr.element_count();
  const std::size_t payload = 8 + 4 * ndim;
  if (bytes.size() != payload + 4 * n) throw InvalidArgument("container: payload length does not match dims");
  arr.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) arr.values[i] = std::bit_cast<float>(detail::get_u32(&bytes[payload + 4 * i]));
  return arr;
}

/// "-" means stdout.
inline void write_container(const std::string &path, const ArrayFile &arr) {
  const std::vector<std::uint8_t> bytes = encode_container(arr);
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw InvalidArgument("write failed: " + path);
}

/// "-" means stdin.
inline ArrayFile read_container(const std::string &path) {
  std::vector<std::uint8_t> bytes;
  if (path == "-") {
    bytes.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot open " + path);
    bytes.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  return decode_container(bytes);
}

// ---------------------------------------------------------------------------
// domain conversions

inline ArrayFile to_array(const FrameCube &cube) {
  ArrayFile a;
  a.dims = {static_cast<std::uint32_t>(cube.frames()), static_cast<std::uint32_t>(cube.rows()),
            static_cast<std::uint32_t>(cube.cols())};
  a.values.assign(cube.data().begin(), cube.data().end());
  return a;
}

inline ArrayFile to_array(const Measurement &meas) {
  ArrayFile a;
  a.dims = {static_cast<std::uint32_t>(meas.rows), static_cast<std::uint32_t>(meas.cols)};
  a.values.assign(meas.data.begin(), meas.data.end());
  return a;
}

inline ArrayFile to_array(const EncodingMask &mask) {
  ArrayFile a;
  a.dims = {static_cast<std::uint32_t>(mask.rows), static_cast<std::uint32_t>(mask.cols)};
  a.values.assign(mask.values.begin(), mask.values.end());
  return a;
}

inline FrameCube cube_from_array(const ArrayFile &a) {
  if (a.dims.size() != 3) throw InvalidArgument("expected a 3-D cube container");
  FrameCube cube(a.dims[0], a.dims[1], a.dims[2], std::vector<double>(a.values.begin(), a.values.end()));
  return cube;
}

/// The row origin is not stored in the file; it follows from the motion profile.
inline Measurement measurement_from_array(const ArrayFile &a, std::size_t row_origin = 0) {
  if (a.dims.size() != 2) throw InvalidArgument("expected a 2-D measurement container");
  Measurement m(a.dims[0], a.dims[1], row_origin);
  m.data.assign(a.values.begin(), a.values.end());
  return m;
}

/// Calibration blocks sit at their fixed positions.
inline EncodingMask mask_from_array(const ArrayFile &a) {
  if (a.dims.size() != 2) throw InvalidArgument("expected a 2-D mask container");
  EncodingMask m;
  m.rows = a.dims[0];
  m.cols = a.dims[1];
  if (m.rows < kMinMaskSide || m.cols < kMinMaskSide) throw InvalidArgument("mask smaller than 8x8");
  m.values.assign(a.values.begin(), a.values.end());
  validate(m);
  return m;
}

} // namespace ccrm
