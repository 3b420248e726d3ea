#pragma once

// PNG import/export of frames through libpng's simplified API.
// Values are scaled by 1/peak and clipped to [0,1] before quantization.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "ccrm/core.hpp"

namespace ccrm {

enum class PngDepth { bits8 = 8, bits16 = 16 };

struct PngImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 1; ///< 1 = grey, 3 = RGB
  std::vector<double> values; ///< interleaved, normalized to [0,1]
};

namespace detail {

inline std::uint32_t png_format(std::size_t channels, PngDepth depth) {
  std::uint32_t fmt = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (depth == PngDepth::bits16) fmt |= PNG_FORMAT_FLAG_LINEAR;
  return fmt;
}

inline double quantize(double v, double peak, double maxval) {
  return std::round(std::clamp(v / peak, 0.0, 1.0) * maxval);
}

} // namespace detail

/// `planes` holds one (grey) or three (R,G,B) row-major planes of rows*cols.
inline void write_png(const std::string &path, std::size_t rows, std::size_t cols,
                      const std::vector<std::span<const double>> &planes, double peak = 1.0,
                      PngDepth depth = PngDepth::bits8) {
  if (planes.size() != 1 && planes.size() != 3) throw InvalidArgument("write_png: need 1 or 3 planes");
  if (!(peak > 0.0)) throw InvalidArgument("write_png: peak must be > 0");
  for (auto p : planes)
    if (p.size() != rows * cols) throw InvalidArgument("write_png: plane size mismatch");

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(cols);
  img.height = static_cast<png_uint_32>(rows);
  img.format = detail::png_format(planes.size(), depth);
  const std::size_t nch = planes.size();
  bool ok = false;
  if (depth == PngDepth::bits8) {
    std::vector<std::uint8_t> buf(rows * cols * nch);
    for (std::size_t i = 0; i < rows * cols; ++i)
      for (std::size_t k = 0; k < nch; ++k)
        buf[i * nch + k] = static_cast<std::uint8_t>(detail::quantize(planes[k][i], peak, 255.0));
    ok = png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr) != 0;
  } else {
    std::vector<std::uint16_t> buf(rows * cols * nch);
    for (std::size_t i = 0; i < rows * cols; ++i)
      for (std::size_t k = 0; k < nch; ++k)
        buf[i * nch + k] = static_cast<std::uint16_t>(detail::quantize(planes[k][i], peak, 65535.0));
    ok = png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr) != 0;
  }
  if (!ok) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw InvalidArgument("write_png " + path + ": " + msg);
  }
}

/// Reads an 8- or 16-bit grey/RGB PNG. Grey images come back with one
/// channel; anything with colour is converted to RGB.
inline PngImage read_png(const std::string &path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw InvalidArgument("read_png " + path + ": " + img.message);
  const bool colour = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const std::size_t nch = colour ? 3 : 1;
  // Keep the file's own depth so that no gamma conversion is applied.
  const bool wide = (img.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  img.format = detail::png_format(nch, wide ? PngDepth::bits16 : PngDepth::bits8);
  PngImage out;
  out.rows = img.height;
  out.cols = img.width;
  out.channels = nch;
  auto finish = [&](auto &buf, double maxval) {
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
      const std::string msg = img.message;
      png_image_free(&img);
      throw InvalidArgument("read_png " + path + ": " + msg);
    }
    out.values.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out.values[i] = static_cast<double>(buf[i]) / maxval;
  };
  if (wide) {
    std::vector<std::uint16_t> buf(PNG_IMAGE_SIZE(img) / sizeof(std::uint16_t));
    finish(buf, 65535.0);
  } else {
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    finish(buf, 255.0);
  }
  return out;
}

/// Writes frames of one (grey) or three (RGB) cubes as <prefix>_NNNN.png.
inline std::vector<std::string> export_frames_png(const std::string &prefix, const std::vector<const FrameCube *> &cubes,
                                                  double peak = 1.0, PngDepth depth = PngDepth::bits8) {
  if (cubes.empty()) throw InvalidArgument("export_frames_png: no cubes");
  const FrameCube &first = *cubes.front();
  for (const FrameCube *c : cubes)
    if (!c->same_shape(first)) throw InvalidArgument("export_frames_png: channel shapes differ");
  std::vector<std::string> paths;
  for (std::size_t f = 0; f < first.frames(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "_%04zu.png", f);
    std::vector<std::span<const double>> planes;
    for (const FrameCube *c : cubes) planes.push_back(c->frame(f));
    paths.push_back(prefix + name);
    write_png(paths.back(), first.rows(), first.cols(), planes, peak, depth);
  }
  return paths;
}

/// Grey reference mask from a PNG (colour images use the mean of R, G and B).
/// Calibration blocks are assumed at their fixed positions.
inline EncodingMask mask_from_png(const std::string &path) {
  const PngImage img = read_png(path);
  if (img.rows < kMinMaskSide || img.cols < kMinMaskSide) throw InvalidArgument("mask image smaller than 8x8");
  EncodingMask m;
  m.rows = img.rows;
  m.cols = img.cols;
  m.values.resize(img.rows * img.cols);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < img.channels; ++k) s += img.values[i * img.channels + k];
    m.values[i] = s / static_cast<double>(img.channels);
  }
  return m;
}

} // namespace ccrm
