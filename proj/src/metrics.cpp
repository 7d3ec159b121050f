#include "pedinav/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pedinav::metrics {

double heading_error_circular(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) throw ValidationError("heading sequences differ in length");
  if (est.empty()) throw ValidationError("heading sequences are empty");
  double acc = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    const double ds = std::sin(est[k]) - std::sin(ref[k]);
    const double dc = std::cos(est[k]) - std::cos(ref[k]);
    const double chord = std::min(2.0, std::sqrt(ds * ds + dc * dc));
    const double theta = 2.0 * std::asin(chord / 2.0);
    acc += theta * theta;
  }
  return std::sqrt(acc / static_cast<double>(est.size()));
}

DetectionScore detection_score(const std::vector<bool>& detected, const std::vector<bool>& truth) {
  if (detected.size() != truth.size()) throw ValidationError("detection and truth masks differ in length");
  DetectionScore s;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (detected[k] && truth[k]) ++s.tp;
    else if (detected[k]) ++s.fp;
    else if (truth[k]) ++s.fn;
    else ++s.tn;
  }
  if (s.tp + s.fp > 0) s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  if (s.tp + s.fn > 0) s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  return s;
}

double endpoint_error(const pdr::Trajectory2D& est, const pdr::Trajectory2D& ref) {
  if (est.empty() || ref.empty()) throw ValidationError("endpoint error needs non-empty tracks");
  return std::hypot(est.back().x - ref.back().x, est.back().y - ref.back().y);
}

double relative_error_percent(double est, double ref) {
  if (ref == 0.0) throw ValidationError("relative error needs a non-zero reference");
  return 100.0 * (est - ref) / ref;
}

SawtoothStats sawtooth_stats(const smins::SminsResult& run, const std::vector<smins::NavState>& truth) {
  const std::size_t n = run.states.size();
  if (truth.size() != n || run.stationary.size() != n || run.innovations.size() != n)
    throw ValidationError("truth and run lengths differ");
  SawtoothStats s;
  double swing_max = 0.0;
  bool in_phase = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double err = (run.states[k].v - truth[k].v).norm();
    if (run.stationary[k] && !in_phase) {
      in_phase = true;
      ++s.stance_phases;
      double entry = err;
      if (run.innovations[k].size() >= 3) entry = (Vec3(run.innovations[k].head<3>()) - truth[k].v).norm();
      s.entry_error.push_back(entry);
      s.exit_error.push_back(err);
      s.max_swing_error = std::max(s.max_swing_error, swing_max);
      swing_max = 0.0;
    } else if (run.stationary[k]) {
      s.exit_error.back() = err;
    } else {
      in_phase = false;
      swing_max = std::max(swing_max, err);
    }
  }
  s.max_swing_error = std::max(s.max_swing_error, swing_max);
  for (std::size_t i = 0; i < s.entry_error.size(); ++i)
    if (s.entry_error[i] > 1e-9) s.worst_exit_ratio = std::max(s.worst_exit_ratio, s.exit_error[i] / s.entry_error[i]);
  return s;
}

}  // namespace pedinav::metrics
