// Synthetic pedestrian IMU data, sensor-error injection and closed-form
// drift assessment.

#pragma once

#include "pedinav/core.hpp"
#include "pedinav/pdr.hpp"
#include "pedinav/smins.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pedinav::sim {

/// Time-stamped angle; scripts interpolate linearly between knots and hold
/// the end values outside them.
struct HeadingKnot {
  double t = 0.0;  // s
  double psi = 0.0;  // rad
};

using HeadingScript = std::vector<HeadingKnot>;

double script_value(const HeadingScript& script, double t);

struct GaitProfile {
  double step_frequency = 1.9;  // Hz
  double step_length = 0.977;  // m
  double walk_speed = 0.0;  // m/s, informational; step_length * step_frequency when 0
  double stance_duration = 0.4;  // s, foot-mounted only
  double swing_peak_accel = 3.0;  // m/s^2, handheld magnitude amplitude
  HeadingScript heading_script;  // walking direction psi_u
  HeadingScript device_offset_script;  // sliding angle psi_s

  // Handheld extras.
  double lead_in = 0.0;  // s standing still before the first step
  double lead_out = 0.0;  // s standing still after the last step
  double amplitude_jitter = 0.0;  // relative, uniform +/- per step
  double frequency_jitter = 0.0;  // relative, uniform +/- per step
  double noise_std = 0.0;  // m/s^2 white noise on the magnitude
  std::uint64_t seed = 1;

  // Foot-mounted extras.
  double lift_height = 0.08;  // m, peak foot clearance
  double twist_rate = 1.5;  // rad/s yaw rate of the heel-off / heel-strike twist
  int twist_samples = 4;  // samples per twist half (out, then back)

  double g = kDefaultGravity;

  void validate() const;
};

struct HandheldWalk {
  ImuStream stream;
  pdr::Trajectory2D truth;  // start point, then one point per step at its peak
  std::vector<double> step_lengths;  // true per-step lengths
  std::vector<double> peak_times;
  std::vector<double> psi_user;  // per sample
  std::vector<double> psi_device;  // per sample
  double true_weinberg_gain = 0.0;
};

/// Handheld (texting-mode) walk sampled at fs for `duration` seconds.
///
/// The body frame is level with z down. The specific-force magnitude is
/// g + A_j sin(phase) while walking, one cycle per step, and g while standing.
/// Step j's true length is k_w (A_j + A_{j-1})^(1/4) (A_0 = 0: the first step
/// starts from rest), with k_w chosen so the mean step equals
/// profile.step_length. The gyro z-rate is the interval-average
/// rate of psi_p = psi_u + psi_s.
HandheldWalk generate_handheld_walk(const GaitProfile& profile, double fs, double duration);

struct FootWalk {
  ImuStream stream;
  std::vector<smins::NavState> truth;
  std::vector<bool> stance;  // true where the sample's interval is stationary
  std::size_t strides = 0;
};

/// Foot-mounted walk: stance then swing each cycle of 1 / step_frequency.
///
/// Swing = yaw twist (out and back), translation, yaw twist. Translation moves
/// step_length along the scripted walking direction with a raised-cosine
/// horizontal velocity and a 1 - cos vertical lift. Samples report the
/// interval-average specific force and angular rate. Integrated with
/// strapdown_step they reproduce the truth exactly at stance samples (up to
/// rounding); mid-swing, position lags by O(dt v) and the twist attitude by
/// the Pade angle error.
FootWalk generate_foot_mounted_walk(const GaitProfile& profile, double fs, double duration);

/// Adds b0 + random-walk bias + white noise per axis, for both sensors.
/// Deterministic for a given seed.
ImuStream inject_sensor_errors(std::span<const ImuSample> stream, const smins::SensorErrorModel& model,
                               std::uint64_t seed);

/// A generator configuration with its sampling rate and length.
struct Scenario {
  GaitProfile profile;
  double fs = 100.0;
  double duration = 30.0;
};

/// Stand-in for a recorded 26-step, 25.4 m texting-mode walk at 100 Hz.
Scenario golden_texting_walk();

/// Four 10 s segments: walking direction 0, 0, -45, -45 deg while the device
/// points 0, 45, -45, 0 deg, with 1 s turns between segments.
Scenario four_segment_heading_walk();

/// Foot-mounted walk at one stride per second, 0.4 s stance, 30 s at 100 Hz.
Scenario foot_stride_walk();

// ---------------------------------------------------------------------------
// Analytical drift assessment

enum class SminsDriftMode {
  /// Velocity error zeroed at every ZUPT, position error kept.
  velocity_reset,
  /// Both position and velocity error scaled by (1 - efficiency) at every ZUPT.
  fractional,
};

struct ErrorBudget {
  double b_a = 0.005;  // accelerometer bias, g-units
  double delta_kw = 0.05;  // relative Weinberg-gain error
  double correction_efficiency = 0.9;
  double zupt_interval = 1.0;  // s
  double g = 10.0;  // m/s^2
  double walk_speed = 2.0;  // m/s
  SminsDriftMode mode = SminsDriftMode::velocity_reset;

  void validate() const;
  double bias_accel() const { return b_a * g; }
};

/// 1/2 (b_a g) t^2.
double assess_ins_drift(const ErrorBudget& budget, double t);

/// sum_j (delta_kw k_w) (f_max - f_min)_j^(1/4) for a walk with Weinberg gain k_w.
double assess_pdr_drift(const ErrorBudget& budget, std::span<const pdr::StepEvent> steps, double k_w);

/// delta_kw times the distance walked at walk_speed in t seconds.
double assess_pdr_drift(const ErrorBudget& budget, double t);

double assess_smins_drift(const ErrorBudget& budget, double t);

struct DriftRow {
  double t = 0.0;
  double ins = 0.0;
  double pdr = 0.0;
  double smins = 0.0;
};

/// Rows at t = 0, step, 2 step, ... up to and including t_end.
std::vector<DriftRow> drift_table(const ErrorBudget& budget, double t_end, double t_step);

}  // namespace pedinav::sim
