#pragma once

// Synthetic scenes, sweep jitter, noisy captures, observed-mask degradation
// and motion-profile extraction from a static calibration scan.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccrm/core.hpp"

namespace ccrm {

enum class SceneKind { moving_square, droplet_train, sparks };
enum class ColorMode { mono, rgb };
enum class MotionKind { zero, sinusoid, random_walk };

struct SceneSpec {
  SceneKind kind = SceneKind::moving_square;
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t frames = 96;
  double velocity = 0.05; ///< pixels per frame
  std::size_t size = 16; ///< object scale in pixels
  std::size_t count = 1;
  std::uint64_t seed = 0;
  ColorMode color = ColorMode::mono;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// One cube for mono, three (R, G, B) for rgb.
using SceneChannels = std::vector<FrameCube>;

namespace detail {

inline void check_scene(const SceneSpec &s) {
  if (s.rows == 0 || s.cols == 0 || s.frames == 0) throw InvalidArgument("gen_scene: dimensions must be positive");
  if (!std::isfinite(s.velocity)) throw InvalidArgument("gen_scene: velocity must be finite");
  if (s.count < 1) throw InvalidArgument("gen_scene: count must be >= 1");
  if (s.size < 1) throw InvalidArgument("gen_scene: size must be >= 1");
  if (s.size > std::min(s.rows, s.cols)) throw InvalidArgument("gen_scene: object larger than field");
}

inline long long round_ll(double v) { return static_cast<long long>(std::llround(v)); }

// Signed distance c - center wrapped into [-n/2, n/2).
inline double wrapped_delta(double c, double center, double n) {
  double d = std::fmod(c - center, n);
  if (d < -n / 2) d += n;
  if (d >= n / 2) d -= n;
  return d;
}

inline SceneChannels replicate(FrameCube cube, ColorMode color) {
  if (color == ColorMode::mono) return {std::move(cube)};
  return {cube, cube, std::move(cube)};
}

inline SceneChannels moving_square(const SceneSpec &s);
inline SceneChannels droplet_train(const SceneSpec &s);
inline SceneChannels sparks(const SceneSpec &s);

} // namespace detail

/// Top-left corner of the moving square at frame f. The path is centred in
/// the field; corners may leave the field, in which case the square clips.
inline std::pair<long long, long long> moving_square_origin(const SceneSpec &s, std::size_t f) {
  const long long travel = detail::round_ll(s.velocity * static_cast<double>(s.frames - 1));
  const long long span = static_cast<long long>(s.cols) - static_cast<long long>(s.size) - travel;
  const long long start = span >= 0 ? span / 2 : -((-span + 1) / 2);
  const long long row = (static_cast<long long>(s.rows) - static_cast<long long>(s.size)) / 2;
  return {row, start + detail::round_ll(s.velocity * static_cast<double>(f))};
}

inline SceneChannels detail::moving_square(const SceneSpec &s) {
  FrameCube cube(s.frames, s.rows, s.cols, 0.0);
  const auto side = static_cast<long long>(s.size);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const auto [r0, c0] = moving_square_origin(s, f);
    for (long long r = std::max(0LL, r0); r < std::min<long long>(r0 + side, s.rows); ++r)
      for (long long c = std::max(0LL, c0); c < std::min<long long>(c0 + side, s.cols); ++c)
        cube.at(f, static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1.0;
  }
  return replicate(std::move(cube), s.color);
}

// Ellipses on a dim channel, spaced evenly and moving horizontally with
// wrap-around. Horizontal diameter `size`, vertical diameter 2/3 of that.
inline SceneChannels detail::droplet_train(const SceneSpec &s) {
  constexpr double background = 0.1, droplet = 0.9;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double n = static_cast<double>(s.cols);
  const double ax = static_cast<double>(s.size) / 2.0;
  const double ay = std::max(0.5, static_cast<double>(s.size) / 3.0);
  const double phase = std::floor(uni(rng) * n);
  const double row_slack = std::max(0.0, (static_cast<double>(s.rows) - 2.0 * ay) / 4.0);

  struct Drop {
    double col, row;
  };
  std::vector<Drop> drops;
  for (std::size_t k = 0; k < s.count; ++k) {
    const double col = std::floor(phase + static_cast<double>(k) * n / static_cast<double>(s.count));
    const double row = std::floor(static_cast<double>(s.rows) / 2.0 + (2.0 * uni(rng) - 1.0) * row_slack);
    drops.push_back({col, row});
  }

  FrameCube cube(s.frames, s.rows, s.cols, background);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const double shift = static_cast<double>(round_ll(s.velocity * static_cast<double>(f)));
    for (const Drop &d : drops) {
      const double cx = d.col + shift;
      for (std::size_t r = 0; r < s.rows; ++r) {
        const double dy = (static_cast<double>(r) - d.row) / ay;
        if (std::abs(dy) > 1.0) continue;
        for (std::size_t c = 0; c < s.cols; ++c) {
          const double dx = wrapped_delta(static_cast<double>(c), cx, n) / ax;
          if (dx * dx + dy * dy <= 1.0) cube.at(f, r, c) = droplet;
        }
      }
    }
  }
  return replicate(std::move(cube), s.color);
}

// Ballistic particles launched from the lower centre with seeded velocities,
// a weak downward pull and exponential fading. Each particle is a Gaussian
// blob of radius ~size/2; rgb gives each particle a warm tint.
inline SceneChannels detail::sparks(const SceneSpec &s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double speed = std::max(std::abs(s.velocity), 1e-3);
  const double sigma = std::max(0.5, static_cast<double>(s.size) / 2.0);
  const auto frames = static_cast<double>(s.frames);

  struct Particle {
    double r0, c0, vr, vc, accel, brightness, life;
    double tint[3];
  };
  std::vector<Particle> parts;
  for (std::size_t k = 0; k < s.count; ++k) {
    Particle p{};
    p.r0 = 0.75 * static_cast<double>(s.rows) + (uni(rng) - 0.5) * 0.1 * static_cast<double>(s.rows);
    p.c0 = 0.5 * static_cast<double>(s.cols) + (uni(rng) - 0.5) * 0.2 * static_cast<double>(s.cols);
    p.vr = -speed * (0.3 + 0.7 * uni(rng));
    p.vc = speed * (2.0 * uni(rng) - 1.0);
    p.accel = 0.5 * speed / frames;
    p.brightness = 0.6 + 0.4 * uni(rng);
    p.life = frames * (0.5 + 1.5 * uni(rng));
    p.tint[0] = 1.0;
    p.tint[1] = 0.4 + 0.5 * uni(rng);
    p.tint[2] = 0.5 * uni(rng);
    parts.push_back(p);
  }

  const std::size_t nchan = s.color == ColorMode::rgb ? 3 : 1;
  SceneChannels out(nchan, FrameCube(s.frames, s.rows, s.cols, 0.0));
  const auto reach = static_cast<long long>(std::ceil(3.0 * sigma));
  for (std::size_t f = 0; f < s.frames; ++f) {
    const double t = static_cast<double>(f);
    for (const Particle &p : parts) {
      const double pr = p.r0 + p.vr * t + 0.5 * p.accel * t * t;
      const double pc = p.c0 + p.vc * t;
      const double amp = p.brightness * std::exp(-t / p.life);
      const long long rc = std::llround(pr), cc = std::llround(pc);
      for (long long r = rc - reach; r <= rc + reach; ++r) {
        if (r < 0 || r >= static_cast<long long>(s.rows)) continue;
        for (long long c = cc - reach; c <= cc + reach; ++c) {
          if (c < 0 || c >= static_cast<long long>(s.cols)) continue;
          const double d2 = (static_cast<double>(r) - pr) * (static_cast<double>(r) - pr) +
                            (static_cast<double>(c) - pc) * (static_cast<double>(c) - pc);
          const double v = amp * std::exp(-d2 / (2.0 * sigma * sigma));
          for (std::size_t k = 0; k < nchan; ++k) {
            const double tint = nchan == 3 ? p.tint[k] : 1.0;
            double &px = out[k].at(f, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            px = std::min(1.0, px + tint * v);
          }
        }
      }
    }
  }
  return out;
}

inline SceneChannels gen_scene(const SceneSpec &spec) {
  detail::check_scene(spec);
  switch (spec.kind) {
  case SceneKind::moving_square: return detail::moving_square(spec);
  case SceneKind::droplet_train: return detail::droplet_train(spec);
  default: return detail::sparks(spec);
  }
}

// ---------------------------------------------------------------------------

inline MotionProfile gen_motion(MotionKind kind, std::size_t frames, double amplitude, std::uint64_t seed) {
  if (frames == 0) throw InvalidArgument("gen_motion: frames must be >= 1");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InvalidArgument("gen_motion: amplitude must be >= 0");
  std::vector<int> offs(frames, 0);
  if (kind == MotionKind::sinusoid) {
    const auto n = static_cast<double>(frames);
    for (std::size_t f = 0; f < frames; ++f)
      offs[f] = static_cast<int>(std::lround(amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(f) / n)));
    const int first = offs[0];
    for (int &o : offs) o -= first;
  } else if (kind == MotionKind::random_walk) {
    const int limit = static_cast<int>(std::floor(amplitude));
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution up(0.5);
    for (std::size_t f = 1; f < frames; ++f) offs[f] = std::clamp(offs[f - 1] + (up(rng) ? 1 : -1), -limit, limit);
  }
  return MotionProfile(std::move(offs));
}

/// forward() plus seeded i.i.d. Gaussian noise; no clipping.
inline Measurement simulate_capture(const FrameCube &cube, const EncodingMask &mask, const MotionProfile &motion,
                                    const NoiseSpec &noise) {
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) throw InvalidArgument("simulate_capture: sigma must be >= 0");
  Measurement y = forward(cube, mask, motion);
  if (noise.sigma > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    for (double &v : y.data) v += gauss(rng);
  }
  return y;
}

/// Uniform unit-intensity static scene used for calibration scans.
inline FrameCube static_calibration_scene(std::size_t frames, std::size_t rows, std::size_t cols) {
  return FrameCube(frames, rows, cols, 1.0);
}

// ---------------------------------------------------------------------------

/// Separable Gaussian blur (3-sigma support, unit-sum kernel, replicate
/// boundary), clipped to [0,1]. Calibration block specs are kept.
inline EncodingMask degrade_mask(const EncodingMask &mask, double blur_sigma) {
  if (!(blur_sigma >= 0.0) || !std::isfinite(blur_sigma)) throw InvalidArgument("degrade_mask: blur_sigma must be >= 0");
  validate(mask);
  if (blur_sigma == 0.0) return mask;

  const auto radius = static_cast<long long>(std::ceil(3.0 * blur_sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * blur_sigma * blur_sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double &k : kernel) k /= sum;

  const auto rows = static_cast<long long>(mask.rows), cols = static_cast<long long>(mask.cols);
  auto clampi = [](long long v, long long hi) { return std::clamp(v, 0LL, hi - 1); };
  std::vector<double> tmp(mask.values.size(), 0.0);
  for (long long r = 0; r < rows; ++r)
    for (long long c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (long long i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * mask.values[static_cast<std::size_t>(r * cols + clampi(c + i, cols))];
      tmp[static_cast<std::size_t>(r * cols + c)] = acc;
    }
  EncodingMask out = mask;
  for (long long r = 0; r < rows; ++r)
    for (long long c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (long long i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(clampi(r + i, rows) * cols + c)];
      out.values[static_cast<std::size_t>(r * cols + c)] = std::clamp(acc, 0.0, 1.0);
    }
  return out;
}

// ---------------------------------------------------------------------------
// motion-profile extraction

namespace detail {

// Pearson correlation of a and b; nullopt when either has zero variance.
inline std::optional<double> pearson(const std::vector<double> &a, const std::vector<double> &b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  constexpr double eps = 1e-24;
  if (saa <= eps * n || sbb <= eps * n) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

struct TraceMatch {
  std::size_t position = 0;
  double peak = 0.0;
  bool accepted = false;
};

// Picks the candidate row with the highest correlation. Accepted when the
// peak is positive and at least twice the median of the other candidates.
template <class Score>
TraceMatch best_position(std::size_t lo, std::size_t hi, Score &&score) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t p = lo; p <= hi; ++p)
    if (auto s = score(p)) scored.emplace_back(*s, p);
  if (scored.empty()) return {};
  auto best = std::max_element(scored.begin(), scored.end(),
                               [](const auto &a, const auto &b) { return a.first < b.first; });
  TraceMatch m{best->second, best->first, false};
  std::vector<double> others;
  for (auto it = scored.begin(); it != scored.end(); ++it)
    if (it != best) others.push_back(it->first);
  double median = 0.0;
  if (!others.empty()) {
    std::sort(others.begin(), others.end());
    const std::size_t mid = others.size() / 2;
    median = others.size() % 2 ? others[mid] : 0.5 * (others[mid - 1] + others[mid]);
  }
  m.accepted = m.peak > 0.0 && m.peak >= 2.0 * std::max(median, 0.0);
  return m;
}

} // namespace detail

inline constexpr int kDefaultSearchWindow = 5;

/// Recovers per-frame vertical offsets from a scan of a static uniform scene.
///
/// Frames are localized in sweep order. Detector column f holds frame f's
/// mask column 0 (which carries the 2x2 tracer) plus columns of earlier
/// frames; once those are localized their contribution is subtracted, and
/// frame f is found by correlating the remainder with the tracer column at
/// rows within +-search_window of frame f-1. If that peak is weak, the wider
/// band [f, f+7] covering the 4x4 tracer is used instead, assuming frames
/// f..f+7 share one position.
inline MotionProfile extract_motion_profile(const Measurement &static_meas, const EncodingMask &mask,
                                            std::size_t frames, int search_window = kDefaultSearchWindow) {
  validate(mask);
  if (frames == 0) throw InvalidArgument("extract_motion_profile: frames must be >= 1");
  if (search_window < 0) throw InvalidArgument("extract_motion_profile: search_window must be >= 0");
  if (static_meas.cols != mask.cols + frames - 1 || static_meas.rows < mask.rows ||
      static_meas.data.size() != static_meas.rows * static_meas.cols)
    throw InvalidArgument("extract_motion_profile: measurement shape inconsistent with mask and frame count");

  const std::size_t rows = static_meas.rows, cols = static_meas.cols;
  const std::size_t span = rows - mask.rows;
  const std::size_t band = mask.calib_secondary.col + mask.calib_secondary.size;
  std::vector<double> residual = static_meas.data;
  std::vector<std::size_t> pos(frames, 0);
  double intensity = 0.0;

  // Expected signal of frames [first, last] all at row p, over detector
  // columns [c0, c1), flattened column-major.
  auto predicted = [&](std::size_t p, std::size_t first, std::size_t last, std::size_t c0, std::size_t c1) {
    std::vector<double> t((c1 - c0) * rows, 0.0);
    for (std::size_t f = first; f <= last; ++f)
      for (std::size_t c = std::max(c0, f); c < std::min(c1, f + mask.cols); ++c)
        for (std::size_t r = 0; r < mask.rows; ++r) t[(c - c0) * rows + p + r] += mask.at(r, c - f);
    return t;
  };
  auto observed = [&](std::size_t c0, std::size_t c1) {
    std::vector<double> o((c1 - c0) * rows);
    for (std::size_t c = c0; c < c1; ++c)
      for (std::size_t r = 0; r < rows; ++r) o[(c - c0) * rows + r] = residual[r * cols + c];
    return o;
  };

  for (std::size_t f = 0; f < frames; ++f) {
    std::size_t lo = 0, hi = span;
    if (f > 0) {
      const auto w = static_cast<std::size_t>(search_window);
      lo = pos[f - 1] > w ? pos[f - 1] - w : 0;
      hi = std::min(span, pos[f - 1] + w);
    }
    const std::vector<double> col = observed(f, f + 1);
    detail::TraceMatch m =
        detail::best_position(lo, hi, [&](std::size_t p) { return detail::pearson(col, predicted(p, f, f, f, f + 1)); });
    if (!m.accepted) {
      const std::size_t last = std::min(frames - 1, f + band - 1);
      const std::size_t c1 = std::min(cols, f + band);
      const std::vector<double> wide = observed(f, c1);
      m = detail::best_position(lo, hi,
                                [&](std::size_t p) { return detail::pearson(wide, predicted(p, f, last, f, c1)); });
      if (!m.accepted) throw ExtractionFailure(f, "no calibration trace found");
    }
    pos[f] = m.position;

    if (f == 0) {
      const std::vector<double> t = predicted(pos[0], 0, 0, 0, 1);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        num += col[i] * t[i];
        den += t[i] * t[i];
      }
      intensity = den > 0.0 ? num / den : 0.0;
      if (!(intensity > 0.0)) throw ExtractionFailure(0, "static scene intensity is not positive");
    }
    for (std::size_t r = 0; r < mask.rows; ++r)
      for (std::size_t c = 0; c < mask.cols; ++c)
        residual[(pos[f] + r) * cols + f + c] -= intensity * mask.at(r, c);
  }

  std::vector<int> offs(frames);
  for (std::size_t f = 0; f < frames; ++f)
    offs[f] = static_cast<int>(pos[f]) - static_cast<int>(pos[0]);
  return MotionProfile(std::move(offs));
}

} // namespace ccrm
