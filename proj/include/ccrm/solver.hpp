#pragma once

// ADMM reconstruction of a frame cube from one CCRM measurement:
//
//   min_x 1/2 ||y - Hx||^2 + rho_tv * sum_a w_a ||D_a x||_1
//
// split as x = v. The x-update is a proximal step on the data term, which has
// a closed form because H*H^T is diagonal (data_prox). The v-update is the
// weighted TV prox (tv_prox) with per-axis thresholds rho_tv*w_a/rho, then an
// optional projection onto x >= 0. With `adapt` on, rho follows residual
// balancing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <vector>

#include "ccrm/core.hpp"
#include "ccrm/tv.hpp"

namespace ccrm {

struct SolverConfig {
  int max_iters = 300;
  double rho_k = 1.0;         ///< initial ADMM penalty
  double rho_tv = 0.05;       ///< TV weight / threshold scale
  TvWeights w_tv{1.0, 1.0, 10.0};
  bool adapt = true;
  double adapt_factor = 2.0;
  double adapt_ratio = 10.0;
  double tol = 1e-4;          ///< relative primal and dual residual stop
  bool nonneg = true;
  int tv_inner_iters = 3;     ///< dual FISTA steps per TV prox (warm-started)

  friend bool operator==(const SolverConfig &, const SolverConfig &) = default;
};

inline void validate(const SolverConfig &cfg) {
  if (cfg.max_iters < 1) throw InvalidArgument("SolverConfig: max_iters must be >= 1");
  if (!(cfg.rho_k > 0.0) || !std::isfinite(cfg.rho_k)) throw InvalidArgument("SolverConfig: rho_k must be > 0");
  if (!(cfg.rho_tv >= 0.0) || !std::isfinite(cfg.rho_tv)) throw InvalidArgument("SolverConfig: rho_tv must be >= 0");
  const TvWeights &w = cfg.w_tv;
  for (Axis a : kAllAxes)
    if (!(w[a] >= 0.0) || !std::isfinite(w[a])) throw InvalidArgument("SolverConfig: w_tv components must be >= 0");
  if (w.horizontal == 0.0 && w.vertical == 0.0 && w.temporal == 0.0)
    throw InvalidArgument("SolverConfig: w_tv must not be all zero");
  if (!(cfg.adapt_factor > 1.0)) throw InvalidArgument("SolverConfig: adapt_factor must be > 1");
  if (!(cfg.adapt_ratio > 1.0)) throw InvalidArgument("SolverConfig: adapt_ratio must be > 1");
  if (!(cfg.tol >= 0.0)) throw InvalidArgument("SolverConfig: tol must be >= 0");
  if (cfg.tv_inner_iters < 1) throw InvalidArgument("SolverConfig: tv_inner_iters must be >= 1");
}

/// Per-iteration diagnostics. Residual histories hold relative residuals:
/// primal ||x - v|| / max(||x||, ||v||), dual ||v - v_prev|| / ||u||.
struct SolveReport {
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> objective_history;
  std::vector<double> primal_residual_history;
  std::vector<double> dual_residual_history;
  std::vector<double> rho_history;
  double wall_time = 0.0; ///< seconds

  /// Equality ignoring wall_time.
  bool same_trajectory(const SolveReport &o) const {
    return iterations_run == o.iterations_run && converged == o.converged &&
           objective_history == o.objective_history && primal_residual_history == o.primal_residual_history &&
           dual_residual_history == o.dual_residual_history && rho_history == o.rho_history;
  }
};

struct Reconstruction {
  FrameCube cube;
  SolveReport report;
};

/// Closed-form proximal step on the data term for a fixed operator.
/// Caches the overlap weights and a detector-sized scratch buffer, so one
/// instance must not be shared between threads.
class DataProx {
public:
  DataProx(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion, std::size_t frames)
      : meas_(meas), mask_(mask), motion_(motion), frames_(frames), weights_(overlap_weights(mask, motion, frames)),
        scratch_(weights_) {
    detail::check_measurement(meas, mask, motion);
  }

  const Measurement &weights() const noexcept { return weights_; }

  /// argmin_x 1/2||y - Hx||^2 + rho/2 ||x - v||^2 = v + H^T[(y - Hv) / (rho + R)].
  /// `out` must be shaped like `v` and must not alias it.
  void apply(const FrameCube &v, double rho, FrameCube &out) {
    if (!(rho > 0.0)) throw InvalidArgument("data_prox: rho must be > 0");
    if (v.frames() != frames_ || v.rows() != mask_.rows || v.cols() != mask_.cols || !out.same_shape(v))
      throw InvalidArgument("data_prox: cube shape inconsistent with operator");
    forward_into(v, mask_, motion_, scratch_);
    for (std::size_t i = 0; i < scratch_.data.size(); ++i)
      scratch_.data[i] = (meas_.data[i] - scratch_.data[i]) / (rho + weights_.data[i]);
    adjoint_into(scratch_, mask_, motion_, out);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += v.data()[i];
  }

  FrameCube operator()(const FrameCube &v, double rho) {
    FrameCube out = v;
    apply(v, rho, out);
    return out;
  }

private:
  const Measurement &meas_;
  const EncodingMask &mask_;
  const MotionProfile &motion_;
  std::size_t frames_;
  Measurement weights_;
  Measurement scratch_;
};

inline FrameCube data_prox(const FrameCube &v, const Measurement &meas, const EncodingMask &mask,
                           const MotionProfile &motion, double rho) {
  DataProx prox(meas, mask, motion, v.frames());
  return prox(v, rho);
}

/// 1/2 ||y - forward(x)||^2 + rho_k * rho_tv * TV(x).
inline double objective(const FrameCube &cube, const Measurement &meas, const EncodingMask &mask,
                        const MotionProfile &motion, const SolverConfig &cfg) {
  detail::check_operator_inputs(mask, motion, cube.frames());
  detail::check_measurement(meas, mask, motion);
  const Measurement hx = forward(cube, mask, motion);
  double data = 0.0;
  for (std::size_t i = 0; i < hx.data.size(); ++i) {
    const double d = meas.data[i] - hx.data[i];
    data += d * d;
  }
  const double reg = cfg.rho_tv == 0.0 ? 0.0 : cfg.rho_k * cfg.rho_tv * tv_value(cube, cfg.w_tv);
  return 0.5 * data + reg;
}

/// Minimum-norm least-squares start H^T[y / max(R, eps)].
inline FrameCube initial_estimate(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion,
                                  std::size_t frames, const Measurement &weights, double eps = 1e-8) {
  Measurement scaled = meas;
  for (std::size_t i = 0; i < scaled.data.size(); ++i) scaled.data[i] /= std::max(weights.data[i], eps);
  return adjoint(scaled, mask, motion, frames);
}

namespace detail {

inline bool all_finite(const std::vector<double> &v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace detail

inline Reconstruction reconstruct(const Measurement &meas, const EncodingMask &mask, const MotionProfile &motion,
                                  std::size_t frames, const SolverConfig &cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  validate(cfg);
  detail::check_operator_inputs(mask, motion, frames);
  detail::check_measurement(meas, mask, motion);
  if (!detail::all_finite(meas.data)) throw NumericalFailure("reconstruct: measurement contains non-finite values");

  DataProx prox(meas, mask, motion, frames);
  FrameCube v = initial_estimate(meas, mask, motion, frames, prox.weights());
  if (cfg.nonneg)
    for (double &e : v.data()) e = std::max(e, 0.0);
  const std::size_t n = v.size();
  FrameCube u(frames, mask.rows, mask.cols, 0.0);
  FrameCube x = v, target = v, v_prev = v;
  TvDual dual;
  Measurement hx = empty_measurement(mask, motion);

  double rho = cfg.rho_k;
  SolveReport report;
  for (int it = 0; it < cfg.max_iters; ++it) {
    // x-update: closed-form data prox around v - u.
    for (std::size_t i = 0; i < n; ++i) target.data()[i] = v.data()[i] - u.data()[i];
    prox.apply(target, rho, x);

    // Regularizer update: weighted TV prox of x + u, thresholds rho_tv*w_a/rho.
    for (std::size_t i = 0; i < n; ++i) target.data()[i] = x.data()[i] + u.data()[i];
    std::swap(v, v_prev);
    tv_prox_into(target, cfg.rho_tv / rho, cfg.w_tv, cfg.tv_inner_iters, dual, v);
    if (cfg.nonneg)
      for (double &e : v.data()) e = std::max(e, 0.0);

    // Dual update and residuals.
    double primal = 0.0, dual_res = 0.0, x_norm = 0.0, v_norm = 0.0, u_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = x.data()[i] - v.data()[i];
      u.data()[i] += r;
      primal += r * r;
      const double dv = v.data()[i] - v_prev.data()[i];
      dual_res += dv * dv;
      x_norm += x.data()[i] * x.data()[i];
      v_norm += v.data()[i] * v.data()[i];
      u_norm += u.data()[i] * u.data()[i];
    }
    primal = std::sqrt(primal);
    dual_res = rho * std::sqrt(dual_res);
    constexpr double tiny = std::numeric_limits<double>::min();
    const double rel_primal = primal / std::max({std::sqrt(x_norm), std::sqrt(v_norm), tiny});
    const double rel_dual = dual_res / std::max(rho * std::sqrt(u_norm), tiny);

    forward_into(v, mask, motion, hx);
    double misfit = 0.0;
    for (std::size_t i = 0; i < hx.data.size(); ++i) misfit += (meas.data[i] - hx.data[i]) * (meas.data[i] - hx.data[i]);
    const double obj = 0.5 * misfit + (cfg.rho_tv == 0.0 ? 0.0 : cfg.rho_k * cfg.rho_tv * tv_value(v, cfg.w_tv));
    if (!std::isfinite(obj) || !detail::all_finite(v.data()) || !detail::all_finite(u.data()))
      throw NumericalFailure("reconstruct: non-finite iterate at iteration " + std::to_string(it));

    report.objective_history.push_back(obj);
    report.primal_residual_history.push_back(rel_primal);
    report.dual_residual_history.push_back(rel_dual);
    report.rho_history.push_back(rho);
    report.iterations_run = it + 1;

    if (rel_primal <= cfg.tol && rel_dual <= cfg.tol) {
      report.converged = true;
      break;
    }
    if (cfg.adapt) {
      // Scaled dual u = y/rho, so it is rescaled inversely to rho.
      if (primal > cfg.adapt_ratio * dual_res) {
        rho *= cfg.adapt_factor;
        for (double &e : u.data()) e /= cfg.adapt_factor;
      } else if (dual_res > cfg.adapt_ratio * primal) {
        rho /= cfg.adapt_factor;
        for (double &e : u.data()) e *= cfg.adapt_factor;
      }
    }
  }
  report.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
  return {std::move(v), std::move(report)};
}

struct ColorReconstruction {
  std::array<FrameCube, 3> channels;
  std::array<SolveReport, 3> reports;
};

/// Independent per-channel reconstruction; at most `threads` channels at once.
inline ColorReconstruction reconstruct_color(const std::array<Measurement, 3> &meas_rgb, const EncodingMask &mask,
                                             const MotionProfile &motion, std::size_t frames,
                                             const SolverConfig &cfg, unsigned threads = 1) {
  validate(cfg);
  for (const Measurement &m : meas_rgb) detail::check_measurement(m, mask, motion);
  threads = std::clamp(threads, 1u, 3u);

  std::array<Reconstruction, 3> out;
  auto run = [&](std::size_t k) { out[k] = reconstruct(meas_rgb[k], mask, motion, frames, cfg); };
  for (std::size_t first = 0; first < 3; first += threads) {
    std::vector<std::future<void>> pending;
    for (std::size_t k = first; k < std::min<std::size_t>(first + threads, 3); ++k)
      pending.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, run, k));
    for (auto &p : pending) p.get();
  }
  ColorReconstruction result;
  for (std::size_t k = 0; k < 3; ++k) {
    result.channels[k] = std::move(out[k].cube);
    result.reports[k] = std::move(out[k].report);
  }
  return result;
}

} // namespace ccrm
