#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ccrm/core.hpp"

namespace ccrm {

/// 10*log10(peak^2 / MSE); +inf when the frames are identical.
inline double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0) {
  if (a.size() != b.size() || a.empty()) throw InvalidArgument("psnr: frames differ in size");
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be > 0");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

struct Centroid {
  double row = 0.0;
  double col = 0.0;
};

/// Intensity-weighted centroid of pixels above `threshold`, per frame;
/// nullopt for frames with no such pixel.
inline std::vector<std::optional<Centroid>> centroid_track(const FrameCube &cube, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw InvalidArgument("centroid_track: threshold must be in [0,1)");
  std::vector<std::optional<Centroid>> track(cube.frames());
  for (std::size_t f = 0; f < cube.frames(); ++f) {
    double w = 0.0, sr = 0.0, sc = 0.0;
    for (std::size_t r = 0; r < cube.rows(); ++r)
      for (std::size_t c = 0; c < cube.cols(); ++c) {
        const double v = cube.at(f, r, c);
        if (v <= threshold) continue;
        w += v;
        sr += v * static_cast<double>(r);
        sc += v * static_cast<double>(c);
      }
    if (w > 0.0) track[f] = Centroid{sr / w, sc / w};
  }
  return track;
}

struct MetricsReport {
  std::vector<double> per_frame_psnr;
  double mean_psnr = 0.0;
  std::vector<double> per_frame_rel_err;
  double centroid_rms = 0.0;      ///< over frames tracked in both cubes
  std::size_t centroid_frames = 0; ///< frames contributing to centroid_rms
};

inline constexpr double kDefaultCentroidThreshold = 0.5;

/// Compares a reconstruction against ground truth frame by frame.
inline MetricsReport compute_metrics(const FrameCube &truth, const FrameCube &recon, double peak = 1.0,
                                     double centroid_threshold = kDefaultCentroidThreshold) {
  if (!truth.same_shape(recon)) throw InvalidArgument("metrics: cubes differ in shape");
  MetricsReport m;
  double sum = 0.0;
  for (std::size_t f = 0; f < truth.frames(); ++f) {
    const double p = psnr(truth.frame(f), recon.frame(f), peak);
    m.per_frame_psnr.push_back(p);
    sum += p;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.frame_size(); ++i) {
      const double d = recon.frame(f)[i] - truth.frame(f)[i];
      num += d * d;
      den += truth.frame(f)[i] * truth.frame(f)[i];
    }
    m.per_frame_rel_err.push_back(den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));
  }
  m.mean_psnr = sum / static_cast<double>(truth.frames());

  const auto a = centroid_track(truth, centroid_threshold);
  const auto b = centroid_track(recon, centroid_threshold);
  double sq = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (!a[f] || !b[f]) continue;
    const double dr = a[f]->row - b[f]->row, dc = a[f]->col - b[f]->col;
    sq += dr * dr + dc * dc;
    ++m.centroid_frames;
  }
  m.centroid_rms = m.centroid_frames ? std::sqrt(sq / static_cast<double>(m.centroid_frames))
                                     : std::numeric_limits<double>::infinity();
  return m;
}

} // namespace ccrm
