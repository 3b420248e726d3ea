#pragma once

// Domain types and the CCRM sensing operator H = T*C*A.
//
// A frame cube x (F frames of M x N) is encoded by a static mask A, scaled
// per frame by a gain g_f, shifted vertically by an integer offset d_f and
// horizontally by f columns, and summed on the detector. Every voxel lands on
// exactly one detector pixel, so H*H^T is diagonal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccrm/errors.hpp"

namespace ccrm {

/// F x M x N intensities, frame-major then row-major.
class FrameCube {
public:
  FrameCube() = default;
  FrameCube(std::size_t frames, std::size_t rows, std::size_t cols, double fill = 0.0)
      : frames_(frames), rows_(rows), cols_(cols), data_(frames * rows * cols, fill) {
    if (frames == 0 || rows == 0 || cols == 0)
      throw InvalidArgument("FrameCube: all dimensions must be >= 1");
  }
  FrameCube(std::size_t frames, std::size_t rows, std::size_t cols, std::vector<double> data)
      : frames_(frames), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (frames == 0 || rows == 0 || cols == 0)
      throw InvalidArgument("FrameCube: all dimensions must be >= 1");
    if (data_.size() != frames * rows * cols)
      throw InvalidArgument("FrameCube: data length does not match F*M*N");
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t frame_size() const noexcept { return rows_ * cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double &at(std::size_t f, std::size_t r, std::size_t c) { return data_[(f * rows_ + r) * cols_ + c]; }
  double at(std::size_t f, std::size_t r, std::size_t c) const { return data_[(f * rows_ + r) * cols_ + c]; }

  std::span<double> frame(std::size_t f) { return {data_.data() + f * frame_size(), frame_size()}; }
  std::span<const double> frame(std::size_t f) const { return {data_.data() + f * frame_size(), frame_size()}; }

  std::vector<double> &data() noexcept { return data_; }
  const std::vector<double> &data() const noexcept { return data_; }

  bool same_shape(const FrameCube &o) const noexcept {
    return frames_ == o.frames_ && rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool is_nonnegative() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
  }

  friend bool operator==(const FrameCube &, const FrameCube &) = default;

private:
  std::size_t frames_ = 0, rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Square calibration tracer region on the mask.
struct BlockSpec {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t size = 0;

  bool contains(std::size_t r, std::size_t c) const noexcept {
    return r >= row && r < row + size && c >= col && c < col + size;
  }
  friend bool operator==(const BlockSpec &, const BlockSpec &) = default;
};

inline constexpr BlockSpec kPrimaryBlock{0, 0, 2};
inline constexpr BlockSpec kSecondaryBlock{0, 4, 4};
inline constexpr std::size_t kMinMaskSide = 8;

enum class MaskStyle { binary, grey };

inline std::string to_string(MaskStyle s) { return s == MaskStyle::binary ? "binary" : "grey"; }

/// Static transmission pattern A with two fully transparent tracer blocks.
struct EncodingMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  BlockSpec calib_primary = kPrimaryBlock;
  BlockSpec calib_secondary = kSecondaryBlock;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double &at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

  bool in_calibration(std::size_t r, std::size_t c) const noexcept {
    return calib_primary.contains(r, c) || calib_secondary.contains(r, c);
  }

  friend bool operator==(const EncodingMask &, const EncodingMask &) = default;
};

/// Per-frame integer vertical offset d_f and positive gain g_f.
struct MotionProfile {
  std::vector<int> offsets;
  std::vector<double> gains;

  MotionProfile() = default;
  explicit MotionProfile(std::vector<int> offs)
      : offsets(std::move(offs)), gains(offsets.size(), 1.0) {}
  MotionProfile(std::vector<int> offs, std::vector<double> g)
      : offsets(std::move(offs)), gains(std::move(g)) {}

  static MotionProfile zero(std::size_t frames) { return MotionProfile(std::vector<int>(frames, 0)); }

  std::size_t frames() const noexcept { return offsets.size(); }
  int min_offset() const { return offsets.empty() ? 0 : *std::min_element(offsets.begin(), offsets.end()); }
  int max_offset() const { return offsets.empty() ? 0 : *std::max_element(offsets.begin(), offsets.end()); }

  friend bool operator==(const MotionProfile &, const MotionProfile &) = default;
};

/// Detector image y. Offset 0 lands on row `row_origin`.
struct Measurement {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_origin = 0;
  std::vector<double> data;

  Measurement() = default;
  Measurement(std::size_t r, std::size_t c, std::size_t origin, double fill = 0.0)
      : rows(r), cols(c), row_origin(origin), data(r * c, fill) {}

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double &at(std::size_t r, std::size_t c) { return data[r * cols + c]; }

  bool same_shape(const Measurement &o) const noexcept {
    return rows == o.rows && cols == o.cols && row_origin == o.row_origin;
  }
  friend bool operator==(const Measurement &, const Measurement &) = default;
};

struct CameraGeometry {
  double rotation_speed_R = 0.0; ///< rounds per second
  double arm_length_L = 0.0;     ///< metres, mirror to detector
  double pixel_pitch_P = 0.0;    ///< metres
};

struct DetectorDims {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const DetectorDims &, const DetectorDims &) = default;
};

// ---------------------------------------------------------------------------
// validation

inline void validate(const EncodingMask &mask) {
  if (mask.rows == 0 || mask.cols == 0 || mask.values.size() != mask.rows * mask.cols)
    throw InvalidArgument("EncodingMask: values length does not match rows*cols");
  for (double v : mask.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidArgument("EncodingMask: transmission outside [0,1]");
}

inline void validate(const MotionProfile &motion) {
  if (motion.offsets.empty())
    throw InvalidArgument("MotionProfile: no frames");
  if (motion.gains.size() != motion.offsets.size())
    throw InvalidArgument("MotionProfile: gains and offsets differ in length");
  if (motion.offsets.front() != 0)
    throw InvalidArgument("MotionProfile: offsets[0] must be 0");
  for (double g : motion.gains)
    if (!(g > 0.0) || !std::isfinite(g))
      throw InvalidArgument("MotionProfile: gains must be positive and finite");
}

// ---------------------------------------------------------------------------
// mask construction

inline void stamp_calibration_blocks(EncodingMask &mask) {
  for (const BlockSpec &b : {mask.calib_primary, mask.calib_secondary})
    for (std::size_t r = b.row; r < b.row + b.size; ++r)
      for (std::size_t c = b.col; c < b.col + b.size; ++c)
        mask.at(r, c) = 1.0;
}

/// Random pattern (binary: Bernoulli(0.5), grey: U[0,1]) with tracer blocks
/// forced to 1 at (0,0) size 2 and (0,4) size 4.
inline EncodingMask make_mask(std::size_t rows, std::size_t cols, MaskStyle style, std::uint64_t seed) {
  if (rows < kMinMaskSide || cols < kMinMaskSide)
    throw InvalidArgument("make_mask: mask must be at least 8x8 to hold calibration blocks");
  EncodingMask mask;
  mask.rows = rows;
  mask.cols = cols;
  mask.values.resize(rows * cols);
  std::mt19937_64 rng(seed);
  if (style == MaskStyle::binary) {
    std::bernoulli_distribution coin(0.5);
    for (double &v : mask.values) v = coin(rng) ? 1.0 : 0.0;
  } else {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double &v : mask.values) v = uni(rng);
  }
  stamp_calibration_blocks(mask);
  return mask;
}

// ---------------------------------------------------------------------------
// geometry

inline DetectorDims detector_dims(std::size_t mask_rows, std::size_t mask_cols, const MotionProfile &motion) {
  if (motion.offsets.empty())
    throw InvalidArgument("detector_dims: no frames");
  const auto span = static_cast<std::size_t>(motion.max_offset() - motion.min_offset());
  return {mask_rows + span, mask_cols + motion.frames() - 1};
}

inline DetectorDims detector_dims(const EncodingMask &mask, std::size_t frames, const MotionProfile &motion) {
  if (frames != motion.frames())
    throw InvalidArgument("detector_dims: frame count differs from motion profile length");
  return detector_dims(mask.rows, mask.cols, motion);
}

inline std::size_t row_origin_for(const MotionProfile &motion) {
  return static_cast<std::size_t>(-motion.min_offset());
}

inline Measurement empty_measurement(const EncodingMask &mask, const MotionProfile &motion) {
  const DetectorDims d = detector_dims(mask, motion.frames(), motion);
  return Measurement(d.rows, d.cols, row_origin_for(motion));
}

namespace detail {

inline void check_operator_inputs(const EncodingMask &mask, const MotionProfile &motion, std::size_t frames) {
  validate(mask);
  validate(motion);
  if (frames != motion.frames())
    throw InvalidArgument("frame count differs from motion profile length");
}

inline void check_measurement(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion) {
  const DetectorDims d = detector_dims(mask, motion.frames(), motion);
  if (meas.rows != d.rows || meas.cols != d.cols)
    throw InvalidArgument("measurement is " + std::to_string(meas.rows) + "x" + std::to_string(meas.cols) +
                          ", expected " + std::to_string(d.rows) + "x" + std::to_string(d.cols));
  if (meas.row_origin != row_origin_for(motion))
    throw InvalidArgument("measurement row origin inconsistent with motion profile");
  if (meas.data.size() != meas.rows * meas.cols)
    throw InvalidArgument("measurement data length does not match rows*cols");
}

inline std::size_t detector_row(const Measurement &meas, const MotionProfile &motion, std::size_t f, std::size_t r) {
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(meas.row_origin) + motion.offsets[f] +
                                  static_cast<std::ptrdiff_t>(r));
}

// y[row_origin + d_f + r, f + c] += (g_f * A[r,c])^power * x_f[r,c], ascending f.
template <int Power, class Source>
void accumulate_into(const EncodingMask &mask, const MotionProfile &motion, Source &&source, Measurement &y) {
  std::fill(y.data.begin(), y.data.end(), 0.0);
  const std::size_t frames = motion.frames();
  for (std::size_t f = 0; f < frames; ++f) {
    const double g = motion.gains[f];
    for (std::size_t r = 0; r < mask.rows; ++r) {
      double *out = &y.data[detector_row(y, motion, f, r) * y.cols + f];
      const double *a = &mask.values[r * mask.cols];
      for (std::size_t c = 0; c < mask.cols; ++c) {
        const double w = g * a[c];
        if constexpr (Power == 1)
          out[c] += w * source(f, r, c);
        else
          out[c] += w * w * source(f, r, c);
      }
    }
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// sensing operator

/// Noiseless capture y = T*C*A*x into a preshaped measurement.
inline void forward_into(const FrameCube &cube, const EncodingMask &mask, const MotionProfile &motion,
                         Measurement &out) {
  detail::check_operator_inputs(mask, motion, cube.frames());
  if (cube.rows() != mask.rows || cube.cols() != mask.cols)
    throw InvalidArgument("forward: cube frame size differs from mask");
  detail::check_measurement(out, mask, motion);
  const double *x = cube.data().data();
  const std::size_t frame = cube.frame_size(), cols = cube.cols();
  detail::accumulate_into<1>(
      mask, motion, [&](std::size_t f, std::size_t r, std::size_t c) { return x[f * frame + r * cols + c]; }, out);
}

/// Noiseless capture y = T*C*A*x.
inline Measurement forward(const FrameCube &cube, const EncodingMask &mask, const MotionProfile &motion) {
  detail::check_operator_inputs(mask, motion, cube.frames());
  Measurement y = empty_measurement(mask, motion);
  forward_into(cube, mask, motion, y);
  return y;
}

/// Transpose of `forward`: x[f,r,c] = g_f * A[r,c] * y[row_origin + d_f + r, f + c].
inline void adjoint_into(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion,
                         FrameCube &out) {
  const std::size_t frames = out.frames();
  detail::check_operator_inputs(mask, motion, frames);
  detail::check_measurement(meas, mask, motion);
  if (out.rows() != mask.rows || out.cols() != mask.cols)
    throw InvalidArgument("adjoint: cube frame size differs from mask");
  for (std::size_t f = 0; f < frames; ++f) {
    const double g = motion.gains[f];
    for (std::size_t r = 0; r < mask.rows; ++r) {
      const double *in = &meas.data[detail::detector_row(meas, motion, f, r) * meas.cols + f];
      const double *a = &mask.values[r * mask.cols];
      double *o = &out.at(f, r, 0);
      for (std::size_t c = 0; c < mask.cols; ++c) o[c] = g * a[c] * in[c];
    }
  }
}

inline FrameCube adjoint(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion,
                         std::size_t frames) {
  detail::check_operator_inputs(mask, motion, frames);
  FrameCube x(frames, mask.rows, mask.cols);
  adjoint_into(meas, mask, motion, x);
  return x;
}

/// Diagonal of H*H^T laid out on the detector.
inline Measurement overlap_weights(const EncodingMask &mask, const MotionProfile &motion, std::size_t frames) {
  detail::check_operator_inputs(mask, motion, frames);
  Measurement w = empty_measurement(mask, motion);
  detail::accumulate_into<2>(mask, motion, [](std::size_t, std::size_t, std::size_t) { return 1.0; }, w);
  return w;
}

// ---------------------------------------------------------------------------
// camera calculators

/// N*F / (N + F - 1): raw cube columns over detector columns.
inline double compression_ratio(long long cols_N, long long frames_F) {
  if (cols_N < 1 || frames_F < 1)
    throw InvalidArgument("compression_ratio: N and F must be >= 1");
  const double n = static_cast<double>(cols_N), f = static_cast<double>(frames_F);
  return n * f / (n + f - 1.0);
}

/// 2*pi*R*L/P in frames per second. The small-angle approximation behind it
/// needs P << L; a warning goes to `warn` (if non-null) when P >= L.
inline double frame_rate(const CameraGeometry &geom, std::ostream *warn = nullptr) {
  if (!(geom.rotation_speed_R >= 0.0) || !(geom.arm_length_L > 0.0) || !(geom.pixel_pitch_P > 0.0))
    throw InvalidArgument("frame_rate: need R >= 0, L > 0, P > 0");
  if (geom.pixel_pitch_P >= geom.arm_length_L && warn)
    *warn << "warning: pixel pitch P >= arm length L; frame-rate approximation is not valid\n";
  return 2.0 * std::numbers::pi * geom.rotation_speed_R * geom.arm_length_L / geom.pixel_pitch_P;
}

inline bool frame_rate_valid(const CameraGeometry &geom) { return geom.pixel_pitch_P < geom.arm_length_L; }

} // namespace ccrm
