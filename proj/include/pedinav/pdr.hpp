// Model-based pedestrian dead reckoning: step detection, step length,
// heading and walking direction, and the planar position recursion.

#pragma once

#include "pedinav/core.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pedinav::pdr {

struct ForceStats {
  std::vector<double> magnitudes;  // |f| per sample, m/s^2
  double mean = 0.0;
  /// Standard deviation of the magnitudes. Used for the peak threshold.
  double sigma_f = 0.0;
  /// sqrt(mean((m_k - mean - mean)^2)): the mean subtracted a second time from
  /// the already mean-removed magnitudes. Reported for comparison only.
  double sigma_f_double_centered = 0.0;
};

/// Magnitudes, trajectory mean and STD. Throws ValidationError on empty input.
ForceStats specific_force_stats(std::span<const ImuSample> stream);

struct StepDetectorConfig {
  double min_step_interval = 0.3;  // s
  double peak_height_factor = 1.5;  // threshold = factor * sigma_f
  /// Absolute floor on the mean-removed peak height (m/s^2). Without it a
  /// standing stream is all noise and 1.5 sigma of noise is crossed often.
  double min_peak_height = 0.5;

  void validate() const;
};

/// One step: the interval ending at a detected specific-force peak.
struct StepEvent {
  std::size_t index = 0;  // sample index of the peak
  double t_peak = 0.0;
  double f_peak = 0.0;  // mean-removed magnitude at the peak
  double f_mag_max = 0.0;
  double f_mag_min = 0.0;
  double duration = 0.0;
  double step_frequency = 0.0;  // 1 / duration
  double sigma_f = 0.0;  // magnitude STD over the step interval

  double peak_to_peak() const { return f_mag_max - f_mag_min; }
  /// (f_max - f_min)^(1/4)
  double weinberg_feature() const;
};

struct StepDetection {
  std::vector<StepEvent> steps;
  ForceStats stats;
  double threshold = 0.0;
  std::vector<std::string> warnings;
};

/// Peak search on the mean-removed magnitude.
///
/// A candidate is a strict local maximum (plateaus resolve to their first
/// sample) above max(peak_height_factor * sigma_f, min_peak_height). Candidates closer than
/// min_step_interval are thinned by height, earlier sample first on ties.
/// Step j covers (t_peak[j-1], t_peak[j]]; the first step starts at the first
/// sample. Sampling gaps above 0.5 s are reported as warnings.
StepDetection detect_steps(std::span<const ImuSample> stream, const StepDetectorConfig& cfg = {});

enum class Gender { male, female };

inline constexpr double kConstantGainMale = 0.415;
inline constexpr double kConstantGainFemale = 0.413;

double constant_gain(Gender g);

/// SL1: k_c * height. Height must lie in (0.5, 2.5) m.
double step_length_constant(double height, Gender gender);

struct StepLengthGains {
  double k_c = kConstantGainMale;
  double k_w = 0.0;
  double k_a1 = 0.0;
  double k_a2 = 0.0;
  double k_a3 = 0.0;
};

/// SL2: k_w * (f_max - f_min)^(1/4).
double step_length_weinberg(const StepEvent& ev, double k_w);

/// SL3: k_a1 * SF + k_a2 * sigma_f + k_a3, clamped at zero.
double step_length_adaptive(const StepEvent& ev, const StepLengthGains& gains);

enum class StepModel { constant, weinberg, adaptive };

/// How an adaptive calibration treats a rank-deficient design matrix.
enum class RankPolicy { strict, min_norm };

struct Calibration {
  StepLengthGains gains;
  double residual_norm = 0.0;
  int rank = 0;
};

/// Fits step-length gains to a walk of known length.
///
/// weinberg: k_w = D / sum_j (f_max - f_min)_j^(1/4), exact in the sum.
/// adaptive: per-step targets D * w_j / sum(w), w_j the Weinberg feature, then
/// a least-squares fit of [SF, sigma_f, 1] -> target. A rank-deficient design
/// throws ValidationError under RankPolicy::strict and returns the
/// minimum-norm solution under RankPolicy::min_norm.
Calibration calibrate_gains(std::span<const StepEvent> steps, double known_distance, StepModel model,
                            RankPolicy policy = RankPolicy::strict);

struct HeadingEstimate {
  double psi = 0.0;  // rad, (-pi, pi]
  bool low_confidence = false;  // |pitch| near pi/2
};

/// Heading of a reference-to-body quaternion.
HeadingEstimate heading_from_quaternion(const Quaternion& q);

/// Walking direction by integrating the gyro rate about the low-passed
/// gravity direction, starting from psi0. One angle per sample (psi0 for the
/// first). Throws ValidationError when |f_LPF| < 0.5 m/s^2.
std::vector<double> walking_direction_gravity(std::span<const ImuSample> stream, LowPassFilter& lpf,
                                              double psi0);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

Point2 position_update_2d(Point2 prev, double step_length, double psi);

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

using Trajectory2D = std::vector<TrajectoryPoint>;

enum class HeadingMode { ahrs_aligned, gravity_offset };

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

struct PdrOptions {
  StepDetectorConfig detector;
  StepModel model = StepModel::weinberg;
  StepLengthGains gains;
  double height = 1.75;  // used by StepModel::constant
  Gender gender = Gender::male;
  HeadingMode heading_mode = HeadingMode::ahrs_aligned;
  double lpf_cutoff_hz = 1.0;
  Pose2D init;
};

struct StepRecord {
  StepEvent event;
  double length = 0.0;
  double heading = 0.0;
};

struct PdrResult {
  Trajectory2D track;  // init point, then one point per step
  std::vector<StepRecord> steps;
  std::vector<std::string> warnings;

  double distance() const;
};

/// Detect steps, estimate their lengths, pick the heading at each peak and
/// advance the planar position.
PdrResult run_pdr(std::span<const ImuSample> stream, const PdrOptions& opts);

/// Step lengths for already detected steps under the given options.
std::vector<double> step_lengths(std::span<const StepEvent> steps, const PdrOptions& opts);

/// Device heading per sample by integrating quaternion kinematics from psi0.
std::vector<double> ahrs_headings(std::span<const ImuSample> stream, double psi0);

}  // namespace pedinav::pdr
