#pragma once

// `ccrm` command-line front end. run_cli() is the whole program; the tool's
// main() only forwards argv.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure,
// 4 calibration extraction failure.

#include <array>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccrm/container.hpp"
#include "ccrm/core.hpp"
#include "ccrm/io.hpp"
#include "ccrm/metrics.hpp"
#include "ccrm/png_io.hpp"
#include "ccrm/sim.hpp"
#include "ccrm/solver.hpp"

namespace ccrm::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kNumericalFailure = 3, kExtractionFailure = 4 };

inline const std::array<std::string, 3> kChannelSuffix{".r", ".g", ".b"};

namespace detail {

inline std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline PngDepth png_depth(int bits) {
  if (bits == 8) return PngDepth::bits8;
  if (bits == 16) return PngDepth::bits16;
  throw InvalidArgument("--png-depth must be 8 or 16");
}

inline std::vector<std::string> channel_paths(const std::string &path, bool color) {
  if (!color) return {path};
  if (path == "-") throw InvalidArgument("colour data cannot be streamed through '-'");
  return {path + kChannelSuffix[0], path + kChannelSuffix[1], path + kChannelSuffix[2]};
}

inline MotionProfile load_motion(const std::string &path, std::size_t frames) {
  if (path.empty()) return MotionProfile::zero(frames);
  MotionProfile m = motion_from_csv(read_text_file(path));
  if (m.frames() != frames)
    throw InvalidArgument("motion profile has " + std::to_string(m.frames()) + " frames, expected " +
                          std::to_string(frames));
  return m;
}

inline Measurement load_measurement(const std::string &path, const EncodingMask &mask, const MotionProfile &motion) {
  Measurement m = measurement_from_array(read_container(path), row_origin_for(motion));
  const DetectorDims d = detector_dims(mask, motion.frames(), motion);
  if (m.rows != d.rows || m.cols != d.cols)
    throw InvalidArgument(path + ": measurement is " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                          ", mask/motion imply " + std::to_string(d.rows) + "x" + std::to_string(d.cols));
  return m;
}

} // namespace detail

// ---------------------------------------------------------------------------
// subcommands
//
// Each register_* function adds a subcommand and returns the action to run
// after parsing. Output goes to `out`, diagnostics to `err`.

struct Streams {
  std::ostream &out;
  std::ostream &err;
};

using Action = std::function<int(Streams)>;

inline Action register_mask_gen(CLI::App &app) {
  auto *cmd = app.add_subcommand("mask-gen", "Generate an encoding mask with calibration blocks");
  struct Opts {
    std::size_t rows = 64, cols = 64;
    std::string style = "grey", out, from_png, png;
    std::uint64_t seed = 0;
    double blur = 0.0;
    int png_depth = 8;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--rows", o->rows, "Mask rows (>= 8)");
  cmd->add_option("--cols", o->cols, "Mask columns (>= 8)");
  cmd->add_option("--style", o->style, "binary | grey")->check(CLI::IsMember({"binary", "grey"}));
  cmd->add_option("--seed", o->seed, "Random seed");
  cmd->add_option("--blur", o->blur, "Gaussian blur sigma modelling the observed grey reference");
  cmd->add_option("--from-png", o->from_png, "Import the mask from a grey PNG instead of generating it");
  cmd->add_option("--png", o->png, "Also export the mask as PNG");
  cmd->add_option("--png-depth", o->png_depth, "PNG bit depth (8 or 16)");
  cmd->add_option("--out", o->out, "Output container ('-' for stdout)")->required();
  return [cmd, o](Streams) {
    (void)cmd;
    EncodingMask mask = o->from_png.empty()
                            ? make_mask(o->rows, o->cols, o->style == "binary" ? MaskStyle::binary : MaskStyle::grey,
                                        o->seed)
                            : mask_from_png(o->from_png);
    mask = degrade_mask(mask, o->blur);
    write_container(o->out, to_array(mask));
    if (!o->png.empty())
      write_png(o->png, mask.rows, mask.cols, {std::span<const double>(mask.values)}, 1.0,
                detail::png_depth(o->png_depth));
    return int(kOk);
  };
}

inline Action register_scene(CLI::App &app) {
  auto *cmd = app.add_subcommand("scene", "Synthesize a dynamic scene cube");
  struct Opts {
    SceneSpec spec;
    std::string kind = "moving_square", color = "mono", out, png_prefix;
    int png_depth = 8;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--kind", o->kind, "moving_square | droplet_train | sparks")
      ->check(CLI::IsMember({"moving_square", "droplet_train", "sparks"}));
  cmd->add_option("--rows", o->spec.rows, "Frame rows");
  cmd->add_option("--cols", o->spec.cols, "Frame columns");
  cmd->add_option("--frames", o->spec.frames, "Number of frames");
  cmd->add_option("--velocity", o->spec.velocity, "Object speed in pixels per frame");
  cmd->add_option("--size", o->spec.size, "Object scale in pixels");
  cmd->add_option("--count", o->spec.count, "Number of objects");
  cmd->add_option("--seed", o->spec.seed, "Random seed");
  cmd->add_option("--color", o->color, "mono | rgb")->check(CLI::IsMember({"mono", "rgb"}));
  cmd->add_option("--png-prefix", o->png_prefix, "Also export frames as <prefix>_NNNN.png");
  cmd->add_option("--png-depth", o->png_depth, "PNG bit depth (8 or 16)");
  cmd->add_option("--out", o->out, "Output container; rgb writes <out>.r/.g/.b")->required();
  return [o](Streams) {
    SceneSpec s = o->spec;
    s.kind = o->kind == "sparks" ? SceneKind::sparks
             : o->kind == "droplet_train" ? SceneKind::droplet_train
                                           : SceneKind::moving_square;
    s.color = o->color == "rgb" ? ColorMode::rgb : ColorMode::mono;
    const SceneChannels cubes = gen_scene(s);
    const auto paths = detail::channel_paths(o->out, s.color == ColorMode::rgb);
    for (std::size_t k = 0; k < cubes.size(); ++k) write_container(paths[k], to_array(cubes[k]));
    if (!o->png_prefix.empty()) {
      std::vector<const FrameCube *> ptrs;
      for (const auto &c : cubes) ptrs.push_back(&c);
      export_frames_png(o->png_prefix, ptrs, 1.0, detail::png_depth(o->png_depth));
    }
    return int(kOk);
  };
}

inline Action register_capture(CLI::App &app) {
  auto *cmd = app.add_subcommand("capture", "Simulate a single-exposure detector capture");
  struct Opts {
    std::string scene, mask, motion, motion_kind = "zero", motion_out, out;
    double amplitude = 0.0, sigma = 0.0;
    std::uint64_t seed = 0;
    bool is_static = false, color = false;
    std::size_t frames = 0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scene", o->scene, "Scene container ('-' for stdin)");
  cmd->add_option("--mask", o->mask, "Mask container")->required();
  cmd->add_option("--motion", o->motion, "Motion profile CSV (frame,dy,gain)");
  cmd->add_option("--motion-kind", o->motion_kind, "Generate motion: zero | sinusoid | random_walk")
      ->check(CLI::IsMember({"zero", "sinusoid", "random_walk"}));
  cmd->add_option("--amplitude", o->amplitude, "Generated motion amplitude in pixels");
  cmd->add_option("--motion-out", o->motion_out, "Write the motion profile used to CSV");
  cmd->add_option("--sigma", o->sigma, "Additive Gaussian noise std-dev");
  cmd->add_option("--seed", o->seed, "Seed for generated motion and noise");
  cmd->add_flag("--static", o->is_static, "Capture a uniform unit-intensity calibration scene");
  cmd->add_option("--frames", o->frames, "Frame count for --static");
  cmd->add_flag("--color", o->color, "Scene and output are .r/.g/.b triples");
  cmd->add_option("--out", o->out, "Output measurement container ('-' for stdout)")->required();
  return [o](Streams) {
    const EncodingMask mask = mask_from_array(read_container(o->mask));
    std::vector<FrameCube> cubes;
    if (o->is_static) {
      if (o->frames == 0) throw InvalidArgument("--static needs --frames");
      cubes.push_back(static_calibration_scene(o->frames, mask.rows, mask.cols));
    } else {
      if (o->scene.empty()) throw InvalidArgument("capture needs --scene or --static");
      for (const auto &p : detail::channel_paths(o->scene, o->color)) cubes.push_back(cube_from_array(read_container(p)));
    }
    const FrameCube &first = cubes.front();
    if (first.rows() != mask.rows || first.cols() != mask.cols)
      throw InvalidArgument("scene frames are " + std::to_string(first.rows()) + "x" + std::to_string(first.cols()) +
                            " but mask is " + std::to_string(mask.rows) + "x" + std::to_string(mask.cols));
    MotionProfile motion;
    if (!o->motion.empty()) {
      motion = detail::load_motion(o->motion, first.frames());
    } else {
      const MotionKind kind = o->motion_kind == "sinusoid" ? MotionKind::sinusoid
                              : o->motion_kind == "random_walk" ? MotionKind::random_walk
                                                                : MotionKind::zero;
      motion = gen_motion(kind, first.frames(), o->amplitude, o->seed);
    }
    if (!o->motion_out.empty()) write_text_file(o->motion_out, motion_to_csv(motion));
    const auto paths = detail::channel_paths(o->out, cubes.size() == 3);
    for (std::size_t k = 0; k < cubes.size(); ++k) {
      const Measurement y = simulate_capture(cubes[k], mask, motion, {o->sigma, o->seed + k});
      write_container(paths[k], to_array(y));
    }
    return int(kOk);
  };
}

inline Action register_calibrate(CLI::App &app) {
  auto *cmd = app.add_subcommand("calibrate", "Extract the motion profile from a static calibration scan");
  struct Opts {
    std::string meas, mask, out;
    std::size_t frames = 0;
    int window = kDefaultSearchWindow;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--meas", o->meas, "Static-scene measurement container")->required();
  cmd->add_option("--mask", o->mask, "Mask container")->required();
  cmd->add_option("--frames", o->frames, "Number of frames in the sweep")->required();
  cmd->add_option("--window", o->window, "Search window in rows around the previous frame");
  cmd->add_option("--out", o->out, "Output motion CSV ('-' for stdout)")->required();
  return [o](Streams s) {
    const EncodingMask mask = mask_from_array(read_container(o->mask));
    const Measurement meas = measurement_from_array(read_container(o->meas));
    const MotionProfile m = extract_motion_profile(meas, mask, o->frames, o->window);
    if (o->out == "-")
      s.out << motion_to_csv(m);
    else
      write_text_file(o->out, motion_to_csv(m));
    return int(kOk);
  };
}

inline Action register_reconstruct(CLI::App &app) {
  auto *cmd = app.add_subcommand("reconstruct", "Recover the frame cube from a measurement");
  struct Opts {
    std::string meas, mask, motion, config, out, report, png_prefix;
    std::size_t frames = 0;
    bool color = false, timing = false;
    unsigned threads = 1;
    int png_depth = 8;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--meas", o->meas, "Measurement container ('-' for stdin)")->required();
  cmd->add_option("--mask", o->mask, "Mask container (the decoding key)")->required();
  cmd->add_option("--motion", o->motion, "Motion profile CSV (default: no jitter)");
  cmd->add_option("--frames", o->frames, "Number of frames to recover")->required();
  cmd->add_option("--config", o->config, "JSON file overriding solver defaults");
  cmd->add_option("--out", o->out, "Output cube container ('-' for stdout)")->required();
  cmd->add_option("--report", o->report, "Write the solve report JSON here");
  cmd->add_flag("--color", o->color, "Measurement and output are .r/.g/.b triples");
  cmd->add_option("--threads", o->threads, "Max colour channels solved concurrently")->check(CLI::Range(1u, 3u));
  cmd->add_flag("--timing", o->timing, "Include wall_time in the report");
  cmd->add_option("--png-prefix", o->png_prefix, "Also export frames as <prefix>_NNNN.png");
  cmd->add_option("--png-depth", o->png_depth, "PNG bit depth (8 or 16)");
  return [o](Streams) {
    const EncodingMask mask = mask_from_array(read_container(o->mask));
    if (o->frames == 0) throw InvalidArgument("--frames must be >= 1");
    const MotionProfile motion = detail::load_motion(o->motion, o->frames);
    const SolverConfig cfg = o->config.empty() ? SolverConfig{} : config_from_json(json::parse(read_text_file(o->config)));

    std::vector<FrameCube> cubes;
    std::vector<SolveReport> reports;
    if (o->color) {
      const auto in = detail::channel_paths(o->meas, true);
      std::array<Measurement, 3> meas{detail::load_measurement(in[0], mask, motion),
                                      detail::load_measurement(in[1], mask, motion),
                                      detail::load_measurement(in[2], mask, motion)};
      ColorReconstruction rc = reconstruct_color(meas, mask, motion, o->frames, cfg, o->threads);
      for (std::size_t k = 0; k < 3; ++k) {
        cubes.push_back(std::move(rc.channels[k]));
        reports.push_back(std::move(rc.reports[k]));
      }
    } else {
      Reconstruction r = reconstruct(detail::load_measurement(o->meas, mask, motion), mask, motion, o->frames, cfg);
      cubes.push_back(std::move(r.cube));
      reports.push_back(std::move(r.report));
    }

    const auto paths = detail::channel_paths(o->out, o->color);
    for (std::size_t k = 0; k < cubes.size(); ++k) write_container(paths[k], to_array(cubes[k]));
    if (!o->report.empty()) {
      json j;
      if (o->color) {
        j["config"] = config_to_json(cfg);
        const char *names[] = {"r", "g", "b"};
        for (std::size_t k = 0; k < 3; ++k) j["channels"][names[k]] = report_to_json(reports[k], o->timing);
      } else {
        j = report_to_json(reports[0], o->timing);
        j["config"] = config_to_json(cfg);
      }
      write_text_file(o->report, j.dump(2) + "\n");
    }
    if (!o->png_prefix.empty()) {
      std::vector<const FrameCube *> ptrs;
      for (const auto &c : cubes) ptrs.push_back(&c);
      export_frames_png(o->png_prefix, ptrs, 1.0, detail::png_depth(o->png_depth));
    }
    return int(kOk);
  };
}

inline Action register_metrics(CLI::App &app) {
  auto *cmd = app.add_subcommand("metrics", "Compare a reconstruction against ground truth");
  struct Opts {
    std::string truth, recon, out;
    double peak = 1.0, threshold = kDefaultCentroidThreshold;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--truth", o->truth, "Ground-truth cube container")->required();
  cmd->add_option("--recon", o->recon, "Reconstructed cube container")->required();
  cmd->add_option("--peak", o->peak, "PSNR peak value");
  cmd->add_option("--threshold", o->threshold, "Centroid intensity threshold in [0,1)");
  cmd->add_option("--out", o->out, "Write metrics JSON here (default stdout)");
  return [o](Streams s) {
    const FrameCube truth = cube_from_array(read_container(o->truth));
    const FrameCube recon = cube_from_array(read_container(o->recon));
    const std::string text = metrics_to_json(compute_metrics(truth, recon, o->peak, o->threshold)).dump(2) + "\n";
    if (o->out.empty() || o->out == "-")
      s.out << text;
    else
      write_text_file(o->out, text);
    return int(kOk);
  };
}

inline Action register_info(CLI::App &app) {
  auto *cmd = app.add_subcommand("info", "Camera calculators and container inspection");
  struct Opts {
    std::vector<long long> ratio;
    std::vector<double> framerate;
    std::string file;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--ratio", o->ratio, "N F: compression ratio N*F/(N+F-1)")->expected(2);
  cmd->add_option("--framerate", o->framerate, "R L P: frame rate 2*pi*R*L/P (rps, m, m)")->expected(3);
  cmd->add_option("--file", o->file, "Print the header of a container");
  return [o](Streams s) {
    if (o->ratio.empty() && o->framerate.empty() && o->file.empty())
      throw InvalidArgument("info needs --ratio, --framerate or --file");
    if (!o->ratio.empty()) s.out << detail::fixed1(compression_ratio(o->ratio[0], o->ratio[1])) << "\n";
    if (!o->framerate.empty()) {
      const CameraGeometry g{o->framerate[0], o->framerate[1], o->framerate[2]};
      s.out << detail::fixed1(frame_rate(g, &s.err)) << "\n";
    }
    if (!o->file.empty()) {
      const ArrayFile a = read_container(o->file);
      s.out << "ndim " << a.dims.size() << " dims";
      for (auto d : a.dims) s.out << " " << d;
      s.out << "\n";
    }
    return int(kOk);
  };
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  CLI::App app{"CCRM camera simulator and compressive reconstructor", "ccrm"};
  app.require_subcommand(1);
  std::map<std::string, Action> actions{
      {"mask-gen", register_mask_gen(app)},      {"scene", register_scene(app)},
      {"capture", register_capture(app)},        {"calibrate", register_calibrate(app)},
      {"reconstruct", register_reconstruct(app)}, {"metrics", register_metrics(app)},
      {"info", register_info(app)},
  };
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kInvalidInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return actions.at(name)(Streams{out, err});
  } catch (const ExtractionFailure &e) {
    err << "calibration failed: " << e.what() << "\n";
    return kExtractionFailure;
  } catch (const NumericalFailure &e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const InvalidArgument &e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const nlohmann::json::exception &e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  }
}

} // namespace ccrm::cli
