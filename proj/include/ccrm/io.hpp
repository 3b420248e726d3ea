#pragma once

// Text formats: motion-profile CSV and JSON solver config / report / metrics.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccrm/core.hpp"
#include "ccrm/metrics.hpp"
#include "ccrm/solver.hpp"

namespace ccrm {

// ---------------------------------------------------------------------------
// motion CSV: header "frame,dy,gain", one row per frame in order.

inline std::string format_gain(double g) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", g);
  return buf;
}

inline std::string motion_to_csv(const MotionProfile &m) {
  validate(m);
  std::string out = "frame,dy,gain\n";
  for (std::size_t f = 0; f < m.frames(); ++f)
    out += std::to_string(f) + "," + std::to_string(m.offsets[f]) + "," + format_gain(m.gains[f]) + "\n";
  return out;
}

inline MotionProfile motion_from_csv(const std::string &text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("motion csv: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,dy,gain") throw InvalidArgument("motion csv: expected header 'frame,dy,gain'");
  MotionProfile m;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw InvalidArgument("motion csv: malformed row '" + line + "'");
    try {
      std::size_t pos = 0;
      const long frame = std::stol(a, &pos);
      if (pos != a.size() || frame != static_cast<long>(expected))
        throw InvalidArgument("motion csv: frames must be listed as 0,1,2,...");
      const int dy = std::stoi(b, &pos);
      if (pos != b.size()) throw InvalidArgument("motion csv: bad dy '" + b + "'");
      const double gain = std::stod(c, &pos);
      if (pos != c.size()) throw InvalidArgument("motion csv: bad gain '" + c + "'");
      m.offsets.push_back(dy);
      m.gains.push_back(gain);
    } catch (const std::logic_error &e) {
      if (dynamic_cast<const InvalidArgument *>(&e)) throw;
      throw InvalidArgument("motion csv: malformed row '" + line + "'");
    }
    ++expected;
  }
  validate(m);
  return m;
}

inline std::string read_text_file(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os << text;
  if (!os) throw InvalidArgument("write failed: " + path);
}

// ---------------------------------------------------------------------------
// JSON

using json = nlohmann::ordered_json;

/// Overrides fields of `base` with keys present in `j`; unknown keys are rejected.
inline SolverConfig config_from_json(const json &j, SolverConfig base = {}) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  try {
    for (const auto &[key, val] : j.items()) {
      if (key == "max_iters") base.max_iters = val.get<int>();
      else if (key == "rho_k") base.rho_k = val.get<double>();
      else if (key == "rho_tv") base.rho_tv = val.get<double>();
      else if (key == "w_tv") {
        if (!val.is_array() || val.size() != 3) throw InvalidArgument("config: w_tv must be [h, v, t]");
        base.w_tv = {val[0].get<double>(), val[1].get<double>(), val[2].get<double>()};
      } else if (key == "adapt") base.adapt = val.get<bool>();
      else if (key == "adapt_factor") base.adapt_factor = val.get<double>();
      else if (key == "adapt_ratio") base.adapt_ratio = val.get<double>();
      else if (key == "tol") base.tol = val.get<double>();
      else if (key == "nonneg") base.nonneg = val.get<bool>();
      else if (key == "tv_inner_iters") base.tv_inner_iters = val.get<int>();
      else throw InvalidArgument("config: unknown key '" + key + "'");
    }
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  validate(base);
  return base;
}

inline json config_to_json(const SolverConfig &c) {
  return json{{"max_iters", c.max_iters},
              {"rho_k", c.rho_k},
              {"rho_tv", c.rho_tv},
              {"w_tv", {c.w_tv.horizontal, c.w_tv.vertical, c.w_tv.temporal}},
              {"adapt", c.adapt},
              {"adapt_factor", c.adapt_factor},
              {"adapt_ratio", c.adapt_ratio},
              {"tol", c.tol},
              {"nonneg", c.nonneg},
              {"tv_inner_iters", c.tv_inner_iters}};
}

/// wall_time is included only on request so that reports stay reproducible.
inline json report_to_json(const SolveReport &r, bool include_timing = false) {
  json j{{"iterations_run", r.iterations_run},
         {"converged", r.converged},
         {"final_objective", r.objective_history.empty() ? 0.0 : r.objective_history.back()},
         {"final_primal_residual", r.primal_residual_history.empty() ? 0.0 : r.primal_residual_history.back()},
         {"final_dual_residual", r.dual_residual_history.empty() ? 0.0 : r.dual_residual_history.back()},
         {"final_rho", r.rho_history.empty() ? 0.0 : r.rho_history.back()},
         {"objective_history", r.objective_history},
         {"primal_residual_history", r.primal_residual_history},
         {"dual_residual_history", r.dual_residual_history},
         {"rho_history", r.rho_history}};
  if (include_timing) j["wall_time"] = r.wall_time;
  return j;
}

/// +inf PSNR is written as the string "inf" (JSON has no infinity).
inline json db_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

inline json metrics_to_json(const MetricsReport &m) {
  json per = json::array();
  for (double p : m.per_frame_psnr) per.push_back(db_to_json(p));
  return json{{"mean_psnr", db_to_json(m.mean_psnr)},
              {"centroid_rms", db_to_json(m.centroid_rms)},
              {"centroid_frames", m.centroid_frames},
              {"per_frame_psnr", per},
              {"per_frame_rel_err", m.per_frame_rel_err}};
}

} // namespace ccrm
