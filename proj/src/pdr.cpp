#include "pedinav/pdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pedinav::pdr {

namespace {

constexpr double kMaxGap = 0.5;  // s
constexpr double kFreeFallLimit = 0.5;  // m/s^2

double stdev(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

double median_rate(std::span<const ImuSample> stream) {
  std::vector<double> dts;
  for (std::size_t k = 1; k < stream.size(); ++k) dts.push_back(stream[k].t - stream[k - 1].t);
  if (dts.empty()) return 0.0;
  std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
  const double dt = dts[dts.size() / 2];
  return dt > 0.0 ? 1.0 / dt : 0.0;
}

}  // namespace

ForceStats specific_force_stats(std::span<const ImuSample> stream) {
  if (stream.empty()) throw ValidationError("specific force statistics need a non-empty stream");
  ForceStats s;
  s.magnitudes.reserve(stream.size());
  for (const auto& smp : stream) s.magnitudes.push_back(smp.f.norm());
  const auto n = static_cast<double>(stream.size());
  s.mean = std::accumulate(s.magnitudes.begin(), s.magnitudes.end(), 0.0) / n;
  double acc = 0.0, acc_double = 0.0;
  for (double m : s.magnitudes) {
    const double centered = m - s.mean;
    acc += centered * centered;
    acc_double += (centered - s.mean) * (centered - s.mean);
  }
  s.sigma_f = std::sqrt(acc / n);
  s.sigma_f_double_centered = std::sqrt(acc_double / n);
  return s;
}

void StepDetectorConfig::validate() const {
  if (!(min_step_interval > 0.0)) throw ValidationError("min_step_interval must be positive");
  if (!(peak_height_factor > 0.0)) throw ValidationError("peak_height_factor must be positive");
  if (!(min_peak_height >= 0.0)) throw ValidationError("min_peak_height must be non-negative");
}

double StepEvent::weinberg_feature() const { return std::pow(std::max(0.0, peak_to_peak()), 0.25); }

StepDetection detect_steps(std::span<const ImuSample> stream, const StepDetectorConfig& cfg) {
  cfg.validate();
  StepDetection out;
  if (stream.empty()) return out;
  out.stats = specific_force_stats(stream);
  out.threshold = std::max(cfg.peak_height_factor * out.stats.sigma_f, cfg.min_peak_height);

  for (std::size_t k = 1; k < stream.size(); ++k) {
    const double gap = stream[k].t - stream[k - 1].t;
    if (gap > kMaxGap) {
      std::ostringstream msg;
      msg << "sampling gap of " << gap << " s at t=" << stream[k - 1].t;
      out.warnings.push_back(msg.str());
    }
  }
  if (stream.size() > 1) {
    const double fs = median_rate(stream);
    if (fs < 20.0) out.warnings.push_back("sampling rate below 20 Hz; step detection is unreliable");
  }

  const auto& mag = out.stats.magnitudes;
  const double mean = out.stats.mean;
  const std::size_t n = mag.size();

  // Strict local maxima; a flat top counts once, at its first sample.
  std::vector<std::size_t> candidates;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(mag[k] > mag[k - 1])) continue;
    std::size_t j = k;
    while (j + 1 < n && mag[j + 1] == mag[k]) ++j;
    if (j + 1 < n && mag[j + 1] < mag[k] && mag[k] - mean > out.threshold) candidates.push_back(k);
    k = j;
  }

  // Thin by height so that no two accepted peaks are closer than the minimum interval.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mag[candidates[a]] > mag[candidates[b]]; });
  std::vector<bool> removed(candidates.size(), false);
  for (std::size_t oi : order) {
    if (removed[oi]) continue;
    const double tp = stream[candidates[oi]].t;
    for (std::size_t j = oi; j-- > 0;) {
      if (tp - stream[candidates[j]].t >= cfg.min_step_interval) break;
      removed[j] = true;
    }
    for (std::size_t j = oi + 1; j < candidates.size(); ++j) {
      if (stream[candidates[j]].t - tp >= cfg.min_step_interval) break;
      removed[j] = true;
    }
  }

  std::size_t begin = 0;  // first sample of the current step interval
  double t_prev = stream.front().t;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    if (removed[ci]) continue;
    const std::size_t peak = candidates[ci];
    const std::span<const double> seg(mag.data() + begin, peak - begin + 1);
    StepEvent ev;
    ev.index = peak;
    ev.t_peak = stream[peak].t;
    ev.f_peak = mag[peak] - mean;
    ev.f_mag_max = *std::max_element(seg.begin(), seg.end());
    ev.f_mag_min = *std::min_element(seg.begin(), seg.end());
    ev.duration = ev.t_peak - t_prev;
    if (!(ev.duration > 0.0)) {
      // A peak on the very first samples has no measurable interval; fall back
      // to the minimum step interval.
      ev.duration = cfg.min_step_interval;
    }
    ev.step_frequency = 1.0 / ev.duration;
    ev.sigma_f = stdev(seg);
    out.steps.push_back(ev);
    begin = peak + 1;
    t_prev = ev.t_peak;
  }
  return out;
}

double constant_gain(Gender g) { return g == Gender::male ? kConstantGainMale : kConstantGainFemale; }

double step_length_constant(double height, Gender gender) {
  if (!(height > 0.5 && height < 2.5)) throw ValidationError("height must lie in (0.5, 2.5) m");
  return constant_gain(gender) * height;
}

double step_length_weinberg(const StepEvent& ev, double k_w) {
  if (!(ev.f_mag_max >= ev.f_mag_min)) throw ValidationError("step has f_mag_max < f_mag_min");
  if (!(k_w > 0.0)) throw ValidationError("Weinberg gain must be positive");
  return k_w * std::pow(ev.peak_to_peak(), 0.25);
}

double step_length_adaptive(const StepEvent& ev, const StepLengthGains& gains) {
  if (!(ev.step_frequency > 0.0)) throw ValidationError("step frequency must be positive");
  return std::max(0.0, gains.k_a1 * ev.step_frequency + gains.k_a2 * ev.sigma_f + gains.k_a3);
}

Calibration calibrate_gains(std::span<const StepEvent> steps, double known_distance, StepModel model,
                            RankPolicy policy) {
  if (!(known_distance > 0.0)) throw ValidationError("known distance must be positive");
  Calibration cal;
  switch (model) {
    case StepModel::constant:
      throw ValidationError("the constant step-length model has no calibrated gains");
    case StepModel::weinberg: {
      if (steps.empty()) throw ValidationError("Weinberg calibration needs at least one step");
      double sum = 0.0;
      for (const auto& s : steps) sum += s.weinberg_feature();
      if (!(sum > 0.0)) throw ValidationError("degenerate calibration: all steps have zero peak-to-peak force");
      cal.gains.k_w = known_distance / sum;
      cal.rank = 1;
      return cal;
    }
    case StepModel::adaptive: {
      if (steps.size() < 3 && policy == RankPolicy::strict)
        throw ValidationError("adaptive calibration needs at least three steps");
      if (steps.empty()) throw ValidationError("adaptive calibration needs at least one step");
      const auto n = static_cast<Eigen::Index>(steps.size());
      Eigen::MatrixXd a(n, 3);
      Eigen::VectorXd w(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& s = steps[static_cast<std::size_t>(j)];
        a(j, 0) = s.step_frequency;
        a(j, 1) = s.sigma_f;
        a(j, 2) = 1.0;
        w(j) = s.weinberg_feature();
      }
      if (!(w.sum() > 0.0)) throw ValidationError("degenerate calibration: all steps have zero peak-to-peak force");
      const Eigen::VectorXd target = known_distance * w / w.sum();
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
      cod.setThreshold(1e-10);
      cal.rank = static_cast<int>(cod.rank());
      if (cal.rank < 3 && policy == RankPolicy::strict)
        throw ValidationError("degenerate calibration: step features (SF, sigma_f, 1) are collinear");
      const Eigen::VectorXd k = cod.solve(target);
      cal.gains.k_a1 = k(0);
      cal.gains.k_a2 = k(1);
      cal.gains.k_a3 = k(2);
      cal.residual_norm = (a * k - target).norm();
      return cal;
    }
  }
  throw ValidationError("unknown step-length model");
}

HeadingEstimate heading_from_quaternion(const Quaternion& q) {
  HeadingEstimate h;
  h.psi = wrap_angle(std::atan2(2.0 * (q.q2 * q.q3 - q.q1 * q.q4), 1.0 - 2.0 * (q.q3 * q.q3 + q.q4 * q.q4)));
  // Element (3,1) of the reference-to-body matrix is -sin(pitch) up to sign.
  const double s = 2.0 * (q.q2 * q.q4 - q.q1 * q.q3);
  h.low_confidence = std::abs(s) > std::cos(1e-3 * kPi);
  return h;
}

std::vector<double> walking_direction_gravity(std::span<const ImuSample> stream, LowPassFilter& lpf,
                                              double psi0) {
  std::vector<double> psi;
  psi.reserve(stream.size());
  double current = psi0;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const double dt = k == 0 ? 0.0 : stream[k].t - stream[k - 1].t;
    // Nominal rate for the first sample; afterwards the local interval.
    const double fs = k == 0 ? (stream.size() > 1 ? 1.0 / (stream[1].t - stream[0].t) : 100.0) : 1.0 / dt;
    const Vec3 f_lpf = lpf.step(stream[k].f, fs);
    const double n = f_lpf.norm();
    if (n < kFreeFallLimit) throw ValidationError("low-passed specific force below 0.5 m/s^2 (free fall)");
    const Vec3 gravity_dir = -f_lpf / n;
    const double omega_v = gravity_dir.dot(stream[k].w);
    current += omega_v * dt;
    psi.push_back(current);
  }
  return psi;
}

Point2 position_update_2d(Point2 prev, double step_length, double psi) {
  if (!(step_length >= 0.0)) throw ValidationError("step length must be non-negative");
  return {prev.x + step_length * std::cos(psi), prev.y + step_length * std::sin(psi)};
}

double PdrResult::distance() const {
  double d = 0.0;
  for (const auto& s : steps) d += s.length;
  return d;
}

std::vector<double> ahrs_headings(std::span<const ImuSample> stream, double psi0) {
  std::vector<double> out;
  out.reserve(stream.size());
  Quaternion q = Quaternion::from_heading(psi0);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    if (k > 0) q = quat_integrate(q, stream[k].w, stream[k].t - stream[k - 1].t);
    out.push_back(heading_from_quaternion(q).psi);
  }
  return out;
}

std::vector<double> step_lengths(std::span<const StepEvent> steps, const PdrOptions& opts) {
  std::vector<double> out;
  out.reserve(steps.size());
  const double sc = opts.model == StepModel::constant ? step_length_constant(opts.height, opts.gender) : 0.0;
  for (const auto& ev : steps) {
    switch (opts.model) {
      case StepModel::constant:
        out.push_back(sc);
        break;
      case StepModel::weinberg:
        out.push_back(step_length_weinberg(ev, opts.gains.k_w));
        break;
      case StepModel::adaptive:
        out.push_back(step_length_adaptive(ev, opts.gains));
        break;
    }
  }
  return out;
}

PdrResult run_pdr(std::span<const ImuSample> stream, const PdrOptions& opts) {
  PdrResult res;
  const double t0 = stream.empty() ? 0.0 : stream.front().t;
  res.track.push_back({t0, opts.init.x, opts.init.y});
  if (stream.empty()) {
    res.warnings.push_back("empty input stream; no steps");
    return res;
  }

  const StepDetection det = detect_steps(stream, opts.detector);
  res.warnings = det.warnings;
  if (det.steps.empty()) {
    res.warnings.push_back("no steps detected");
    return res;
  }

  std::vector<double> headings;
  if (opts.heading_mode == HeadingMode::ahrs_aligned) {
    headings = ahrs_headings(stream, opts.init.psi);
  } else {
    LowPassFilter lpf(opts.lpf_cutoff_hz);
    headings = walking_direction_gravity(stream, lpf, opts.init.psi);
  }

  const std::vector<double> lengths = step_lengths(det.steps, opts);
  Point2 pos{opts.init.x, opts.init.y};
  for (std::size_t j = 0; j < det.steps.size(); ++j) {
    const auto& ev = det.steps[j];
    const double psi = headings[ev.index];
    pos = position_update_2d(pos, lengths[j], psi);
    res.track.push_back({ev.t_peak, pos.x, pos.y});
    res.steps.push_back({ev, lengths[j], wrap_angle(psi)});
  }
  return res;
}

}  // namespace pedinav::pdr
