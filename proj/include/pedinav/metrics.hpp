// Evaluation metrics for runs against a reference.

#pragma once

#include "pedinav/pdr.hpp"
#include "pedinav/smins.hpp"

#include <span>
#include <vector>

namespace pedinav::metrics {

/// Angular RMSE from the chord between unit heading vectors.
///
/// Each pair contributes theta = 2 asin(c / 2) with
/// c^2 = (sin a - sin b)^2 + (cos a - cos b)^2, so whole turns never count.
double heading_error_circular(std::span<const double> est, std::span<const double> ref);

struct DetectionScore {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 1.0;  // 1 when nothing was flagged
  double recall = 1.0;  // 1 when nothing should have been flagged
};

DetectionScore detection_score(const std::vector<bool>& detected, const std::vector<bool>& truth);

/// Distance between the last points of two tracks.
double endpoint_error(const pdr::Trajectory2D& est, const pdr::Trajectory2D& ref);

/// Relative error in percent; the reference must be non-zero.
double relative_error_percent(double est, double ref);

/// Velocity-error envelope of a closed-loop run against a truth trajectory.
struct SawtoothStats {
  std::size_t stance_phases = 0;
  /// Largest |v - v_true| between consecutive stance phases.
  double max_swing_error = 0.0;
  /// Per stance phase: error entering the phase (before its first update)
  /// and error at its last sample.
  std::vector<double> entry_error;
  std::vector<double> exit_error;
  /// max over phases of exit / entry, skipping phases that enter with no
  /// error to speak of (below 1e-9 m/s).
  double worst_exit_ratio = 0.0;
};

/// The result must come from a run with ZVU aiding, so that the pre-update
/// velocity is available as the innovation.
SawtoothStats sawtooth_stats(const smins::SminsResult& run, const std::vector<smins::NavState>& truth);

}  // namespace pedinav::metrics
