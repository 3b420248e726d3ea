#pragma once

// Anisotropic 3-D total variation on a FrameCube: forward differences with
// replicate boundaries (the difference at the last index along an axis is 0).

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ccrm/core.hpp"

namespace ccrm {

enum class Axis : std::size_t { horizontal = 0, vertical = 1, temporal = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::horizontal, Axis::vertical, Axis::temporal};

struct TvWeights {
  double horizontal = 1.0;
  double vertical = 1.0;
  double temporal = 1.0;

  double operator[](Axis a) const noexcept {
    switch (a) {
    case Axis::horizontal: return horizontal;
    case Axis::vertical: return vertical;
    default: return temporal;
    }
  }
  friend bool operator==(const TvWeights &, const TvWeights &) = default;
};

namespace detail {

struct Strides {
  std::size_t step;   // index distance to the next sample along the axis
  std::size_t extent; // number of samples along the axis
};

inline Strides strides(const FrameCube &shape, Axis axis) {
  switch (axis) {
  case Axis::horizontal: return {1, shape.cols()};
  case Axis::vertical: return {shape.cols(), shape.rows()};
  default: return {shape.frame_size(), shape.frames()};
  }
}

// Calls fn(i, x[i+step] - x[i]) for every index, with 0 at the last sample
// along the axis.
template <class Fn>
void for_each_difference(const FrameCube &x, Axis axis, Fn &&fn) {
  const auto [step, extent] = strides(x, axis);
  const double *v = x.data().data();
  const std::size_t n = x.size();
  const std::size_t block = step * extent;
  if (step == 1) {
    for (std::size_t base = 0; base < n; base += block) {
      for (std::size_t i = base; i + 1 < base + extent; ++i) fn(i, v[i + 1] - v[i]);
      fn(base + extent - 1, 0.0);
    }
    return;
  }
  for (std::size_t base = 0; base < n; base += block) {
    for (std::size_t k = 0; k + 1 < extent; ++k) {
      const std::size_t o = base + k * step;
      for (std::size_t j = 0; j < step; ++j) fn(o + j, v[o + j + step] - v[o + j]);
    }
    const std::size_t last = base + (extent - 1) * step;
    for (std::size_t j = 0; j < step; ++j) fn(last + j, 0.0);
  }
}

} // namespace detail

/// out = D_axis x. `out` must have x.size() elements.
inline void gradient(const FrameCube &x, Axis axis, std::span<double> out) {
  detail::for_each_difference(x, axis, [&](std::size_t i, double d) { out[i] = d; });
}

/// out += D_axis^T p, for p shaped like `shape`.
inline void add_gradient_adjoint(const FrameCube &shape, Axis axis, std::span<const double> p,
                                 std::span<double> out) {
  const auto [step, extent] = detail::strides(shape, axis);
  if (extent == 1) return;
  const std::size_t n = shape.size();
  const std::size_t block = step * extent;
  if (step == 1) {
    for (std::size_t base = 0; base < n; base += block) {
      out[base] -= p[base];
      for (std::size_t i = base + 1; i + 1 < base + extent; ++i) out[i] += p[i - 1] - p[i];
      out[base + extent - 1] += p[base + extent - 2];
    }
    return;
  }
  for (std::size_t base = 0; base < n; base += block) {
    for (std::size_t j = 0; j < step; ++j) out[base + j] -= p[base + j];
    for (std::size_t k = 1; k + 1 < extent; ++k) {
      const std::size_t o = base + k * step;
      for (std::size_t j = 0; j < step; ++j) out[o + j] += p[o + j - step] - p[o + j];
    }
    const std::size_t last = base + (extent - 1) * step;
    for (std::size_t j = 0; j < step; ++j) out[last + j] += p[last + j - step];
  }
}

/// Sum over axes of w_axis * ||D_axis x||_1.
inline double tv_value(const FrameCube &cube, const TvWeights &w) {
  double total = 0.0;
  for (Axis a : kAllAxes) {
    if (w[a] == 0.0) continue;
    double s = 0.0;
    detail::for_each_difference(cube, a, [&](std::size_t, double d) { s += std::abs(d); });
    total += w[a] * s;
  }
  return total;
}

/// Soft threshold sign(z) * max(|z| - t, 0).
inline double shrink(double z, double threshold) {
  const double m = std::abs(z) - threshold;
  if (m <= 0.0) return 0.0;
  return z > 0.0 ? m : -m;
}

inline void shrink_inplace(std::span<double> z, double threshold) {
  for (double &v : z) v = shrink(v, threshold);
}

inline std::vector<double> shrink(std::span<const double> z, double threshold) {
  if (threshold < 0.0) throw InvalidArgument("shrink: threshold must be >= 0");
  std::vector<double> out(z.begin(), z.end());
  shrink_inplace(out, threshold);
  return out;
}


/// Warm-start state and scratch for tv_prox: one dual field per axis.
struct TvDual {
  std::array<std::vector<double>, 3> p;
  std::array<std::vector<double>, 3> q;
  std::vector<double> dt;
};

/// argmin_v 1/2 ||v - w||^2 + lambda * sum_a w_a ||D_a v||_1, approximated by
/// `iters` FISTA steps on the dual (v = w - D^T p with |p_a| <= lambda*w_a).
/// The box projection there is the complement of shrink(., lambda*w_a).
/// `out` must be shaped like `w` and must not alias it.
inline void tv_prox_into(const FrameCube &w, double lambda, const TvWeights &weights, int iters, TvDual &dual,
                         FrameCube &out) {
  if (!(lambda >= 0.0)) throw InvalidArgument("tv_prox: lambda must be >= 0");
  if (!out.same_shape(w)) throw InvalidArgument("tv_prox: output shape mismatch");
  const std::size_t n = w.size();
  std::vector<Axis> axes;
  for (Axis a : kAllAxes)
    if (weights[a] > 0.0 && lambda > 0.0) axes.push_back(a);
  if (axes.empty()) {
    out.data() = w.data();
    return;
  }

  for (Axis a : axes) {
    const auto ia = static_cast<std::size_t>(a);
    auto &p = dual.p[ia];
    const double bound = lambda * weights[a];
    if (p.size() != n) p.assign(n, 0.0);
    for (double &x : p) x = std::clamp(x, -bound, bound);
    dual.q[ia] = p;
  }
  dual.dt.resize(n);
  const double step = 1.0 / (4.0 * static_cast<double>(axes.size()));

  auto primal_from = [&](const std::array<std::vector<double>, 3> &dp) {
    std::fill(dual.dt.begin(), dual.dt.end(), 0.0);
    for (Axis a : axes) add_gradient_adjoint(w, a, dp[static_cast<std::size_t>(a)], dual.dt);
    const double *wd = w.data().data();
    double *od = out.data().data();
    for (std::size_t i = 0; i < n; ++i) od[i] = wd[i] - dual.dt[i];
  };

  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    primal_from(dual.q);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (Axis a : axes) {
      const auto ia = static_cast<std::size_t>(a);
      const double bound = lambda * weights[a];
      double *p = dual.p[ia].data();
      double *q = dual.q[ia].data();
      detail::for_each_difference(out, a, [&](std::size_t i, double g) {
        const double next = std::clamp(q[i] + step * g, -bound, bound);
        q[i] = next + momentum * (next - p[i]);
        p[i] = next;
      });
    }
    t = t_next;
  }
  primal_from(dual.p);
}

inline FrameCube tv_prox(const FrameCube &w, double lambda, const TvWeights &weights, int iters, TvDual &dual) {
  FrameCube out = w;
  tv_prox_into(w, lambda, weights, iters, dual, out);
  return out;
}

/// Cold-started convenience overload.
inline FrameCube tv_prox(const FrameCube &w, double lambda, const TvWeights &weights, int iters) {
  TvDual dual;
  return tv_prox(w, lambda, weights, iters, dual);
}

} // namespace ccrm
