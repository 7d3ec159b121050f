#include "pedinav/commands.hpp"

#include "pedinav/config.hpp"
#include "pedinav/io.hpp"
#include "pedinav/metrics.hpp"
#include "pedinav/pdr.hpp"
#include "pedinav/sim.hpp"
#include "pedinav/smins.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#ifndef PEDINAV_VERSION
#define PEDINAV_VERSION "unknown"
#endif

namespace pedinav::cli {

namespace {

using config::Json;
namespace fs = std::filesystem;

#define PEDINAV_STR2(x) #x
#define PEDINAV_STR(x) PEDINAV_STR2(x)

// State shared by every command: the loaded config, the effective section
// after command-line overrides, and what goes into the report.
struct Run {
  std::string command;
  Json doc = Json::object();
  Json effective = Json::object();
  Json metrics = Json::object();
  Json outputs = Json::object();
  Json inputs = Json::object();
  std::vector<std::string> warnings;
  std::optional<std::uint64_t> seed;

  void add_input(const std::string& path) { inputs[path] = config::sha256_file(path); }

  Json report(const std::string& status) const {
    Json prov = {{"version", PEDINAV_VERSION},
                 {"eigen", PEDINAV_STR(EIGEN_WORLD_VERSION) "." PEDINAV_STR(EIGEN_MAJOR_VERSION) "." PEDINAV_STR(
                               EIGEN_MINOR_VERSION)},
                 {"config_sha256", config::sha256_hex(effective.dump())},
                 {"config", effective},
                 {"inputs", inputs}};
    prov["seed"] = seed ? Json(*seed) : Json(nullptr);
    return Json{{"command", command}, {"status", status},       {"metrics", metrics},
                {"outputs", outputs}, {"warnings", warnings},   {"provenance", prov}};
  }
};

template <typename T>
void set_if(Json& obj, const char* key, const std::optional<T>& v) {
  if (v) obj[key] = *v;
}

Json& child(Json& obj, const char* key) {
  if (!obj.contains(key)) obj[key] = Json::object();
  return obj[key];
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory '" + dir + "': " + ec.message());
}

void add_output_hashes(Json& outputs) {
  Json hashes = Json::object();
  for (const auto& [k, v] : outputs.items()) hashes[k] = config::sha256_file(v.get<std::string>());
  outputs["sha256"] = hashes;
}

bool gains_present(const pdr::StepLengthGains& g, pdr::StepModel m) {
  switch (m) {
    case pdr::StepModel::constant: return true;
    case pdr::StepModel::weinberg: return g.k_w > 0.0;
    case pdr::StepModel::adaptive: return g.k_a1 != 0.0 || g.k_a2 != 0.0 || g.k_a3 != 0.0;
  }
  return false;
}

// ---------------------------------------------------------------------------

struct PdrArgs {
  std::string input, output, gains_out;
  std::optional<std::string> model, gains, gender, heading_mode, reference_track;
  std::optional<double> height, reference_distance, fs_hint, peak_height_factor, min_peak_height, known_distance;
  bool min_norm = false;
};

void apply_pdr_overrides(Json& sec, const PdrArgs& a) {
  set_if(sec, "model", a.model);
  set_if(sec, "gains_file", a.gains);
  set_if(sec, "gender", a.gender);
  set_if(sec, "heading_mode", a.heading_mode);
  set_if(sec, "reference_track", a.reference_track);
  set_if(sec, "height", a.height);
  set_if(sec, "reference_distance", a.reference_distance);
  set_if(sec, "fs_hint", a.fs_hint);
  if (a.peak_height_factor || a.min_peak_height) {
    Json& d = child(sec, "detector");
    set_if(d, "peak_height_factor", a.peak_height_factor);
    set_if(d, "min_peak_height", a.min_peak_height);
  }
}

void pdr_run(Run& run, const PdrArgs& a) {
  Json sec = config::section(run.doc, "pdr");
  apply_pdr_overrides(sec, a);
  run.effective = {{"pdr", sec}, {"input", a.input}};
  config::PdrSection cfg = config::parse_pdr(sec);
  auto& opts = cfg.options;

  run.add_input(a.input);
  io::Ingested in = io::ingest_imu_csv(a.input, cfg.fs_hint);
  run.warnings = in.warnings;

  if (cfg.gains_file) {
    run.add_input(*cfg.gains_file);
    const pdr::StepLengthGains g = config::gains_from_json(config::load_json(*cfg.gains_file));
    opts.gains = g;
  }
  if (!gains_present(opts.gains, opts.model)) {
    if (!cfg.reference_distance)
      throw ValidationError("step model '" + config::to_string(opts.model) +
                            "' needs gains: pass --gains or a reference distance to calibrate on this walk");
    const auto det = pdr::detect_steps(in.stream, opts.detector);
    if (det.steps.empty()) {
      run.warnings.push_back("no steps to calibrate on");
    } else {
      opts.gains = pdr::calibrate_gains(det.steps, *cfg.reference_distance, opts.model).gains;
      run.warnings.push_back("gains calibrated on the input walk itself");
    }
  }

  const pdr::PdrResult res = pdr::run_pdr(in.stream, opts);
  run.warnings.insert(run.warnings.end(), res.warnings.begin(), res.warnings.end());
  io::write_trajectory_csv(a.output, res.track);
  run.outputs["trajectory"] = a.output;

  auto& m = run.metrics;
  m["samples"] = in.rows;
  m["duration_s"] = in.duration;
  m["step_count"] = res.steps.size();
  m["distance_m"] = res.distance();
  m["mean_step_length_m"] = res.steps.empty() ? 0.0 : res.distance() / static_cast<double>(res.steps.size());
  m["model"] = config::to_string(opts.model);
  m["gains"] = config::gains_to_json(opts.gains, opts.model);
  if (cfg.reference_distance) {
    m["reference_distance_m"] = *cfg.reference_distance;
    m["relative_error_percent"] = metrics::relative_error_percent(res.distance(), *cfg.reference_distance);
  }
  if (cfg.reference_track) {
    run.add_input(*cfg.reference_track);
    const auto ref = io::read_trajectory_csv(*cfg.reference_track);
    m["endpoint_error_m"] = metrics::endpoint_error(res.track, ref);
    if (ref.size() == res.track.size() && !res.steps.empty()) {
      std::vector<double> est, truth;
      for (std::size_t j = 1; j < ref.size(); ++j) {
        est.push_back(res.steps[j - 1].heading);
        truth.push_back(std::atan2(ref[j].y - ref[j - 1].y, ref[j].x - ref[j - 1].x));
      }
      m["heading_rmse_rad"] = metrics::heading_error_circular(est, truth);
    } else {
      run.warnings.push_back("reference track has a different number of steps; heading RMSE skipped");
    }
  }
}

void pdr_calibrate(Run& run, const PdrArgs& a) {
  Json sec = config::section(run.doc, "pdr");
  apply_pdr_overrides(sec, a);
  run.effective = {{"pdr", sec}, {"input", a.input}};
  config::PdrSection cfg = config::parse_pdr(sec);
  const double known = a.known_distance ? *a.known_distance
                       : cfg.reference_distance
                           ? *cfg.reference_distance
                           : throw ValidationError("calibration needs --known-distance (or pdr.reference_distance)");
  run.effective["known_distance"] = known;
  if (cfg.options.model == pdr::StepModel::constant)
    throw ValidationError("the constant model has nothing to calibrate; choose weinberg or adaptive");

  run.add_input(a.input);
  io::Ingested in = io::ingest_imu_csv(a.input, cfg.fs_hint);
  run.warnings = in.warnings;
  const auto det = pdr::detect_steps(in.stream, cfg.options.detector);
  run.warnings.insert(run.warnings.end(), det.warnings.begin(), det.warnings.end());
  const auto cal = pdr::calibrate_gains(det.steps, known, cfg.options.model,
                                        a.min_norm ? pdr::RankPolicy::min_norm : pdr::RankPolicy::strict);
  Json gains = config::gains_to_json(cal.gains, cfg.options.model);
  write_json(a.gains_out, gains);
  run.outputs["gains"] = a.gains_out;

  pdr::PdrOptions check = cfg.options;
  check.gains = cal.gains;
  double total = 0.0;
  for (double s : pdr::step_lengths(det.steps, check)) total += s;
  auto& m = run.metrics;
  m["step_count"] = det.steps.size();
  m["known_distance_m"] = known;
  m["calibrated_distance_m"] = total;
  m["relative_error_percent"] = metrics::relative_error_percent(total, known);
  m["rank"] = cal.rank;
  m["residual_norm"] = cal.residual_norm;
  m["gains"] = gains;
}

// ---------------------------------------------------------------------------

struct SminsArgs {
  std::string input, output;
  std::optional<std::string> truth, mask;
  std::optional<double> fs_hint;
  bool use_mask = false, no_zvu = false, zar = false;
};

void smins_run(Run& run, const SminsArgs& a) {
  Json sec = config::section(run.doc, "smins");
  set_if(sec, "truth", a.truth);
  set_if(sec, "mask", a.mask);
  set_if(sec, "fs_hint", a.fs_hint);
  if (a.use_mask) sec["use_mask_as_detector"] = true;
  if (a.no_zvu) child(sec, "aiding")["zvu"] = false;
  if (a.zar) child(sec, "aiding")["zar"] = true;
  run.effective = {{"smins", sec}, {"input", a.input}};
  config::SminsSection cfg = config::parse_smins(sec);

  run.add_input(a.input);
  io::Ingested in = io::ingest_imu_csv(a.input, cfg.fs_hint);
  run.warnings = in.warnings;

  std::optional<std::vector<smins::NavState>> truth;
  std::optional<std::vector<bool>> mask;
  if (cfg.truth_file) {
    run.add_input(*cfg.truth_file);
    truth = io::read_truth_csv(*cfg.truth_file);
    if (truth->size() != in.stream.size()) throw ValidationError("truth file length does not match the IMU log");
  }
  if (cfg.mask_file) {
    run.add_input(*cfg.mask_file);
    mask = io::read_mask_csv(*cfg.mask_file);
    if (mask->size() != in.stream.size()) throw ValidationError("mask file length does not match the IMU log");
  }
  if (cfg.use_mask_as_detector) {
    if (!mask) throw ValidationError("use_mask_as_detector requires a mask file");
    cfg.options.stationary_override = *mask;
  }

  const smins::SminsResult res = smins::run_smins(in.stream, cfg.options);
  io::write_nav_csv(a.output, res.states, res.stationary);
  run.outputs["nav"] = a.output;

  auto& m = run.metrics;
  m["samples"] = in.rows;
  m["duration_s"] = in.duration;
  std::size_t stationary = 0;
  for (bool s : res.stationary) stationary += s ? 1 : 0;
  m["stationary_fraction"] = res.stationary.empty() ? 0.0 : double(stationary) / double(res.stationary.size());
  if (!res.states.empty()) {
    const Vec3 p = res.states.back().p;
    m["final_position_m"] = {p.x(), p.y(), p.z()};
  }
  m["covariance_ok"] = res.covariance_ok;
  m["final_covariance_trace"] = res.covariance_trace.empty() ? 0.0 : res.covariance_trace.back();
  if (truth && !res.states.empty()) {
    const Vec3 d = res.states.back().p - truth->back().p;
    m["endpoint_error_m"] = d.norm();
    m["endpoint_error_horizontal_m"] = std::hypot(d.x(), d.y());
    if (cfg.options.aiding.zvu) {
      const auto st = metrics::sawtooth_stats(res, *truth);
      m["sawtooth"] = {{"stance_phases", st.stance_phases},
                       {"max_swing_velocity_error_mps", st.max_swing_error},
                       {"worst_exit_to_entry_ratio", st.worst_exit_ratio}};
    }
  }
  if (mask) {
    const auto sc = metrics::detection_score(res.stationary, *mask);
    m["zvd_precision"] = sc.precision;
    m["zvd_recall"] = sc.recall;
  }
  if (!res.covariance_ok) throw NumericalError("covariance failed the symmetry / PSD health check");
}

// ---------------------------------------------------------------------------

struct SimArgs {
  std::string output_dir;
  std::string scenario = "golden";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration, fs, bias_mg;
};

void sim_gait(Run& run, const SimArgs& a) {
  sim::Scenario base;
  if (a.scenario == "golden") base = sim::golden_texting_walk();
  else if (a.scenario == "four_segment") base = sim::four_segment_heading_walk();
  else throw ValidationError("unknown gait scenario '" + a.scenario + "' (golden | four_segment)");
  Json sec = config::section(run.doc, "sim");
  set_if(sec, "duration", a.duration);
  set_if(sec, "fs", a.fs);
  if (a.seed) child(sec, "profile")["seed"] = *a.seed;
  run.effective = {{"sim", sec}, {"scenario", a.scenario}};
  const config::SimSection cfg = config::parse_sim(sec, base);
  run.seed = cfg.scenario.profile.seed;

  const auto walk = sim::generate_handheld_walk(cfg.scenario.profile, cfg.scenario.fs, cfg.scenario.duration);
  const ImuStream stream = sim::inject_sensor_errors(walk.stream, cfg.sensor_errors, cfg.error_seed);
  ensure_dir(a.output_dir);
  const std::string imu = (fs::path(a.output_dir) / "imu.csv").string();
  const std::string track = (fs::path(a.output_dir) / "truth_track.csv").string();
  const std::string headings = (fs::path(a.output_dir) / "headings.csv").string();
  io::write_imu_csv(imu, stream);
  io::write_trajectory_csv(track, walk.truth);
  {
    std::ofstream out(headings);
    if (!out) throw ValidationError("cannot open '" + headings + "' for writing");
    out << "t,psi_user,psi_device\n";
    for (std::size_t k = 0; k < stream.size(); ++k)
      out << io::format_double(stream[k].t) << ',' << io::format_double(walk.psi_user[k]) << ','
          << io::format_double(walk.psi_device[k]) << '\n';
  }
  run.outputs = {{"imu", imu}, {"truth_track", track}, {"headings", headings}};
  add_output_hashes(run.outputs);
  double distance = 0.0;
  for (double s : walk.step_lengths) distance += s;
  run.metrics = {{"samples", stream.size()},
                 {"steps", walk.step_lengths.size()},
                 {"distance_m", distance},
                 {"true_weinberg_gain", walk.true_weinberg_gain}};
}

void sim_foot(Run& run, const SimArgs& a) {
  Json sec = config::section(run.doc, "sim");
  set_if(sec, "duration", a.duration);
  set_if(sec, "fs", a.fs);
  if (a.seed) sec["error_seed"] = *a.seed;
  if (a.bias_mg) {
    const double g = sec.contains("profile") && sec["profile"].contains("g") ? sec["profile"]["g"].get<double>()
                                                                             : kDefaultGravity;
    child(sec, "sensor_errors")["b_a0"] = {*a.bias_mg * 1e-3 * g, 0.0, 0.0};
  }
  run.effective = {{"sim", sec}, {"scenario", "foot"}};
  const config::SimSection cfg = config::parse_sim(sec, sim::foot_stride_walk());
  run.seed = cfg.error_seed;

  const auto walk = sim::generate_foot_mounted_walk(cfg.scenario.profile, cfg.scenario.fs, cfg.scenario.duration);
  const ImuStream stream = sim::inject_sensor_errors(walk.stream, cfg.sensor_errors, cfg.error_seed);
  ensure_dir(a.output_dir);
  const std::string imu = (fs::path(a.output_dir) / "imu.csv").string();
  const std::string truth = (fs::path(a.output_dir) / "truth.csv").string();
  const std::string mask = (fs::path(a.output_dir) / "mask.csv").string();
  io::write_imu_csv(imu, stream);
  io::write_truth_csv(truth, walk.truth);
  io::write_mask_csv(mask, stream, walk.stance);
  run.outputs = {{"imu", imu}, {"truth", truth}, {"mask", mask}};
  add_output_hashes(run.outputs);
  run.metrics = {{"samples", stream.size()}, {"strides", walk.strides}};
}

// ---------------------------------------------------------------------------

struct AssessArgs {
  std::optional<std::string> output;
  std::optional<double> t_end, t_step, b_a, g, delta_kw, walk_speed, zupt_interval, efficiency;
  std::optional<std::string> mode;
};

void assess_drift(Run& run, const AssessArgs& a) {
  Json sec = config::section(run.doc, "assess");
  set_if(sec, "t_end", a.t_end);
  set_if(sec, "t_step", a.t_step);
  if (a.b_a || a.g || a.delta_kw || a.walk_speed || a.zupt_interval || a.efficiency || a.mode) {
    Json& b = child(sec, "budget");
    set_if(b, "b_a", a.b_a);
    set_if(b, "g", a.g);
    set_if(b, "delta_kw", a.delta_kw);
    set_if(b, "walk_speed", a.walk_speed);
    set_if(b, "zupt_interval", a.zupt_interval);
    set_if(b, "correction_efficiency", a.efficiency);
    set_if(b, "mode", a.mode);
  }
  run.effective = {{"assess", sec}};
  const config::AssessSection cfg = config::parse_assess(sec);
  const auto rows = sim::drift_table(cfg.budget, cfg.t_end, cfg.t_step);
  if (a.output) {
    io::write_drift_csv(*a.output, rows);
    run.outputs["drift_table"] = *a.output;
  }
  const auto& last = rows.back();
  run.metrics = {{"t_s", last.t},
                 {"dp_ins_m", last.ins},
                 {"dp_pdr_m", last.pdr},
                 {"dp_smins_m", last.smins},
                 {"rows", rows.size()}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pedestrian navigation toolkit: PDR, shoe-mounted INS, simulation and drift assessment", "pedinav"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PEDINAV_VERSION);
  std::string config_path, report_path;
  app.add_option("--config", config_path, "JSON config with pdr / smins / sim / assess sections")
      ->check(CLI::ExistingFile);
  app.add_option("--report", report_path, "Also write the JSON report to this file");

  Run ctx;
  std::function<void()> action;

  PdrArgs pa;
  auto* pdr_cmd = app.add_subcommand("pdr", "Pedestrian dead reckoning");
  pdr_cmd->require_subcommand(1);
  auto add_pdr_common = [&](CLI::App* c) {
    c->add_option("--input,-i", pa.input, "IMU CSV (t,fx,fy,fz,wx,wy,wz)")->required()->check(CLI::ExistingFile);
    c->add_option("--model", pa.model, "constant | weinberg | adaptive");
    c->add_option("--peak-height-factor", pa.peak_height_factor, "Peak threshold in units of sigma_f");
    c->add_option("--min-peak-height", pa.min_peak_height, "Absolute peak floor, m/s^2");
    c->add_option("--fs-hint", pa.fs_hint, "Expected sampling rate, Hz");
  };
  auto* pdr_run_cmd = pdr_cmd->add_subcommand("run", "Detect steps and build the planar track");
  add_pdr_common(pdr_run_cmd);
  pdr_run_cmd->add_option("--output,-o", pa.output, "Trajectory CSV (t,x,y)")->required();
  pdr_run_cmd->add_option("--gains", pa.gains, "Gains JSON from `pdr calibrate`");
  pdr_run_cmd->add_option("--height", pa.height, "User height for the constant model, m");
  pdr_run_cmd->add_option("--gender", pa.gender, "male | female");
  pdr_run_cmd->add_option("--heading-mode", pa.heading_mode, "ahrs_aligned | gravity_offset");
  pdr_run_cmd->add_option("--reference-distance", pa.reference_distance, "Known walked distance, m");
  pdr_run_cmd->add_option("--reference-track", pa.reference_track, "Reference trajectory CSV (t,x,y)");
  pdr_run_cmd->callback([&] { action = [&] { pdr_run(ctx, pa); }; ctx.command = "pdr run"; });

  auto* pdr_cal_cmd = pdr_cmd->add_subcommand("calibrate", "Fit step-length gains to a walk of known length");
  add_pdr_common(pdr_cal_cmd);
  pdr_cal_cmd->add_option("--known-distance", pa.known_distance, "Walked distance, m");
  pdr_cal_cmd->add_option("--gains-out", pa.gains_out, "Gains JSON to write")->required();
  pdr_cal_cmd->add_flag("--min-norm", pa.min_norm, "Accept a rank-deficient adaptive fit (minimum-norm gains)");
  pdr_cal_cmd->callback([&] { action = [&] { pdr_calibrate(ctx, pa); }; ctx.command = "pdr calibrate"; });

  SminsArgs sa;
  auto* smins_cmd = app.add_subcommand("smins", "Shoe-mounted INS");
  smins_cmd->require_subcommand(1);
  auto* smins_run_cmd = smins_cmd->add_subcommand("run", "Closed-loop strapdown INS with zero-velocity aiding");
  smins_run_cmd->add_option("--input,-i", sa.input, "IMU CSV")->required()->check(CLI::ExistingFile);
  smins_run_cmd->add_option("--output,-o", sa.output, "Nav CSV")->required();
  smins_run_cmd->add_option("--truth", sa.truth, "Truth nav CSV from `sim foot`");
  smins_run_cmd->add_option("--mask", sa.mask, "Stance mask CSV (t,stationary)");
  smins_run_cmd->add_flag("--use-mask", sa.use_mask, "Use the mask instead of the detector");
  smins_run_cmd->add_flag("--no-zvu", sa.no_zvu, "Disable zero-velocity updates");
  smins_run_cmd->add_flag("--zar", sa.zar, "Enable zero-angular-rate updates");
  smins_run_cmd->add_option("--fs-hint", sa.fs_hint, "Expected sampling rate, Hz");
  smins_run_cmd->callback([&] { action = [&] { smins_run(ctx, sa); }; ctx.command = "smins run"; });

  SimArgs ma;
  auto* sim_cmd = app.add_subcommand("sim", "Synthetic IMU data");
  sim_cmd->require_subcommand(1);
  auto add_sim_common = [&](CLI::App* c) {
    c->add_option("--output-dir,-o", ma.output_dir, "Directory for the generated files")->required();
    c->add_option("--seed", ma.seed, "Random seed");
    c->add_option("--duration", ma.duration, "Length, s");
    c->add_option("--fs", ma.fs, "Sampling rate, Hz");
  };
  auto* gait_cmd = sim_cmd->add_subcommand("gait", "Handheld texting-mode walk");
  add_sim_common(gait_cmd);
  gait_cmd->add_option("--scenario", ma.scenario, "golden | four_segment");
  gait_cmd->callback([&] { action = [&] { sim_gait(ctx, ma); }; ctx.command = "sim gait"; });
  auto* foot_cmd = sim_cmd->add_subcommand("foot", "Foot-mounted walk with truth and stance mask");
  add_sim_common(foot_cmd);
  foot_cmd->add_option("--bias-mg", ma.bias_mg, "Accelerometer x bias, mg");
  foot_cmd->callback([&] { action = [&] { sim_foot(ctx, ma); }; ctx.command = "sim foot"; });

  AssessArgs aa;
  auto* assess_cmd = app.add_subcommand("assess", "Analytical error assessment");
  assess_cmd->require_subcommand(1);
  auto* drift_cmd = assess_cmd->add_subcommand("drift", "Position drift of INS, PDR and SM-INS over time");
  drift_cmd->add_option("--output,-o", aa.output, "Drift table CSV");
  drift_cmd->add_option("--t-end", aa.t_end, "Last time, s");
  drift_cmd->add_option("--t-step", aa.t_step, "Row spacing, s");
  drift_cmd->add_option("--b-a", aa.b_a, "Accelerometer bias, g-units");
  drift_cmd->add_option("--g", aa.g, "Gravity, m/s^2");
  drift_cmd->add_option("--delta-kw", aa.delta_kw, "Relative Weinberg-gain error");
  drift_cmd->add_option("--walk-speed", aa.walk_speed, "m/s");
  drift_cmd->add_option("--zupt-interval", aa.zupt_interval, "s");
  drift_cmd->add_option("--efficiency", aa.efficiency, "ZUPT correction efficiency for the fractional mode");
  drift_cmd->add_option("--mode", aa.mode, "velocity_reset | fractional");
  drift_cmd->callback([&] { action = [&] { assess_drift(ctx, aa); }; ctx.command = "assess drift"; });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  const auto finish = [&](const std::string& status, int code) {
    const Json report = ctx.report(status);
    out << report.dump(2) << '\n';
    if (!report_path.empty()) {
      try {
        write_json(report_path, report);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
      }
    }
    return code;
  };

  try {
    if (!config_path.empty()) {
      ctx.doc = config::load_json(config_path);
      ctx.add_input(config_path);
    }
    action();
  } catch (const NumericalError& e) {
    err << "numerical health failure: " << e.what() << '\n';
    ctx.warnings.push_back(e.what());
    return finish("numerical_error", kExitNumerical);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    ctx.warnings.push_back(e.what());
    return finish("validation_error", kExitValidation);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    ctx.warnings.push_back(e.what());
    return finish("validation_error", kExitValidation);
  }
  return finish("ok", kExitOk);
}

}  // namespace pedinav::cli
