#include "pedinav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pedinav::sim {

double script_value(const HeadingScript& script, double t) {
  if (script.empty()) return 0.0;
  if (t <= script.front().t) return script.front().psi;
  if (t >= script.back().t) return script.back().psi;
  const auto it = std::upper_bound(script.begin(), script.end(), t,
                                   [](double v, const HeadingKnot& k) { return v < k.t; });
  const HeadingKnot& b = *it;
  const HeadingKnot& a = *(it - 1);
  if (b.t == a.t) return b.psi;
  return a.psi + (b.psi - a.psi) * (t - a.t) / (b.t - a.t);
}

void GaitProfile::validate() const {
  if (!(step_frequency > 0.0) || !std::isfinite(step_frequency)) throw ValidationError("step_frequency must be positive");
  if (!(step_length >= 0.0) || !std::isfinite(step_length)) throw ValidationError("step_length must be non-negative");
  if (!(stance_duration >= 0.0) || stance_duration >= 1.0 / step_frequency)
    throw ValidationError("stance_duration must be non-negative and shorter than one cycle");
  if (!(swing_peak_accel >= 0.0) || !std::isfinite(swing_peak_accel))
    throw ValidationError("swing_peak_accel must be non-negative");
  if (lead_in < 0.0 || lead_out < 0.0) throw ValidationError("lead-in and lead-out must be non-negative");
  if (amplitude_jitter < 0.0 || amplitude_jitter >= 1.0 || frequency_jitter < 0.0 || frequency_jitter >= 1.0)
    throw ValidationError("jitter fractions must lie in [0, 1)");
  if (noise_std < 0.0) throw ValidationError("noise_std must be non-negative");
  if (lift_height < 0.0 || twist_rate < 0.0 || twist_samples < 0) throw ValidationError("foot motion parameters must be non-negative");
  for (std::size_t k = 1; k < heading_script.size(); ++k)
    if (heading_script[k].t < heading_script[k - 1].t) throw ValidationError("heading script must be time-ordered");
  for (std::size_t k = 1; k < device_offset_script.size(); ++k)
    if (device_offset_script[k].t < device_offset_script[k - 1].t)
      throw ValidationError("device offset script must be time-ordered");
}

namespace {

std::size_t sample_count(double fs, double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be non-negative");
  return static_cast<std::size_t>(std::llround(duration * fs)) + 1;
}

}  // namespace

HandheldWalk generate_handheld_walk(const GaitProfile& profile, double fs, double duration) {
  profile.validate();
  if (!(fs >= 50.0)) throw ValidationError("handheld generation needs fs >= 50 Hz");
  const std::size_t n = sample_count(fs, duration);
  const double dt = 1.0 / fs;
  const double g = profile.g;

  std::mt19937_64 rng(profile.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double walk_start = profile.lead_in;
  const double walk_time = std::max(0.0, duration - profile.lead_in - profile.lead_out);
  const auto steps = static_cast<std::size_t>(std::llround(walk_time * profile.step_frequency));

  std::vector<double> starts, durations, amps;
  if (steps > 0) {
    double total = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const double d = (1.0 + profile.frequency_jitter * unit(rng)) / profile.step_frequency;
      durations.push_back(d);
      amps.push_back(profile.swing_peak_accel * (1.0 + profile.amplitude_jitter * unit(rng)));
      total += d;
    }
    double t = walk_start;
    for (auto& d : durations) {
      d *= walk_time / total;
      starts.push_back(t);
      t += d;
    }
  }

  HandheldWalk out;
  out.stream.resize(n);
  out.psi_user.resize(n);
  out.psi_device.resize(n);
  std::size_t cycle = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    double mag = g;
    while (cycle < steps && t >= starts[cycle] + durations[cycle]) ++cycle;
    if (cycle < steps && t >= starts[cycle]) {
      const double phase = 2.0 * kPi * (t - starts[cycle]) / durations[cycle];
      mag += amps[cycle] * std::sin(phase);
    }
    if (profile.noise_std > 0.0) mag += profile.noise_std * normal(rng);

    const double psi_u = script_value(profile.heading_script, t);
    const double psi_p = psi_u + script_value(profile.device_offset_script, t);
    out.psi_user[k] = psi_u;
    out.psi_device[k] = psi_p;

    ImuSample& s = out.stream[k];
    s.t = t;
    s.f = Vec3(0.0, 0.0, -mag);
    const double rate = k == 0 ? 0.0 : (psi_p - out.psi_device[k - 1]) / dt;
    s.w = Vec3(0.0, 0.0, rate);
  }

  // True lengths follow the Weinberg relation on the true peak-to-peak swing.
  std::vector<double> features;
  for (std::size_t j = 0; j < steps; ++j) {
    const double prev = j == 0 ? 0.0 : amps[j - 1];
    features.push_back(std::pow(amps[j] + prev, 0.25));
  }
  double feature_sum = 0.0;
  for (double f : features) feature_sum += f;
  out.true_weinberg_gain = feature_sum > 0.0 ? profile.step_length * static_cast<double>(steps) / feature_sum : 0.0;

  double x = 0.0, y = 0.0;
  out.truth.push_back({0.0, x, y});
  for (std::size_t j = 0; j < steps; ++j) {
    const double tp = starts[j] + 0.25 * durations[j];
    const double len = out.true_weinberg_gain * features[j];
    const double psi = script_value(profile.heading_script, tp);
    x += len * std::cos(psi);
    y += len * std::sin(psi);
    out.truth.push_back({tp, x, y});
    out.step_lengths.push_back(len);
    out.peak_times.push_back(tp);
  }
  return out;
}

FootWalk generate_foot_mounted_walk(const GaitProfile& profile, double fs, double duration) {
  profile.validate();
  if (!(fs >= 100.0)) throw ValidationError("foot-mounted generation needs fs >= 100 Hz");
  const std::size_t n = sample_count(fs, duration);
  const double dt = 1.0 / fs;
  const double g = profile.g;

  const auto cycle = static_cast<std::size_t>(std::llround(fs / profile.step_frequency));
  const auto stance = static_cast<std::size_t>(std::llround(profile.stance_duration * fs));
  const auto tw = static_cast<std::size_t>(profile.twist_samples);
  if (stance >= cycle) throw ValidationError("stance fills the whole cycle");
  const std::size_t swing = cycle - stance;
  if (swing < 4 * tw + 8)
    throw ValidationError("swing phase too short to realize the step length with the twist phases");
  const std::size_t nt = swing - 4 * tw;
  const double period = static_cast<double>(nt) * dt;
  const double L = profile.step_length;
  const double h = profile.lift_height;
  const double omega = 2.0 * kPi / period;
  if (2.0 * kPi * L / (period * period) > 20.0 * g)
    throw ValidationError("swing phase too short: the step length needs more than 20 g of acceleration");

  // Translation profile at local time tau in [0, period].
  const auto horiz_pos = [&](double tau) { return (L / period) * (tau - std::sin(omega * tau) / omega); };
  const auto horiz_vel = [&](double tau) { return (L / period) * (1.0 - std::cos(omega * tau)); };
  const auto vert_pos = [&](double tau) { return -0.5 * h * (1.0 - std::cos(omega * tau)); };
  const auto vert_vel = [&](double tau) { return -0.5 * h * omega * std::sin(omega * tau); };

  FootWalk out;
  out.stream.resize(n);
  out.truth.resize(n);
  out.stance.resize(n);
  out.stream[0].t = 0.0;
  out.stream[0].f = Vec3(0.0, 0.0, -g);
  out.truth[0] = smins::NavState{};
  out.stance[0] = true;

  Vec3 base = Vec3::Zero();  // position at the start of the current cycle
  std::size_t current_cycle = 0;
  double yaw = 0.0;
  Vec3 dir(1.0, 0.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const std::size_t c = (k - 1) / cycle;
    const std::size_t i = (k - 1) % cycle;
    if (c != current_cycle) {
      base += L * dir;
      current_cycle = c;
    }
    if (i == 0) {
      const double psi = script_value(profile.heading_script, static_cast<double>(c * cycle + stance) * dt);
      dir = Vec3(std::cos(psi), std::sin(psi), 0.0);
      if (c == 0) base.setZero();
    }

    ImuSample& s = out.stream[k];
    smins::NavState& truth = out.truth[k];
    s.t = t;
    truth.t = t;
    s.f = Vec3(0.0, 0.0, -g);
    s.w.setZero();
    truth.p = base;
    truth.v.setZero();
    out.stance[k] = i < stance;

    if (i >= stance) {
      const std::size_t j = i - stance;  // interval index within the swing
      const std::size_t tail = 2 * tw + nt;
      if (j < 2 * tw || j >= tail) {
        const std::size_t jj = j < 2 * tw ? j : j - tail;
        const double rate = jj < tw ? profile.twist_rate : -profile.twist_rate;
        s.w = Vec3(0.0, 0.0, rate);
        yaw += rate * dt;
        truth.p = j < 2 * tw ? base : Vec3(base + L * dir);
      } else {
        const std::size_t m = j - 2 * tw;  // interval (tau_m, tau_m+1]
        const double t0 = static_cast<double>(m) * dt;
        const double t1 = static_cast<double>(m + 1) * dt;
        const Vec3 v0 = horiz_vel(t0) * dir + Vec3(0.0, 0.0, vert_vel(t0));
        const Vec3 v1 = horiz_vel(t1) * dir + Vec3(0.0, 0.0, vert_vel(t1));
        const Vec3 a = (v1 - v0) / dt;
        s.f = a - Vec3(0.0, 0.0, g);
        truth.p = base + horiz_pos(t1) * dir + Vec3(0.0, 0.0, vert_pos(t1));
        truth.v = v1;
      }
      if (j + 1 == swing) yaw = 0.0;  // the twist returns exactly
    }
    truth.attitude = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  }
  out.strides = n > 1 ? (n - 1) / cycle : 0;
  return out;
}

ImuStream inject_sensor_errors(std::span<const ImuSample> stream, const smins::SensorErrorModel& model,
                               std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&] { return Vec3(normal(rng), normal(rng), normal(rng)); };

  ImuStream out(stream.begin(), stream.end());
  Vec3 ba = model.b_a0;
  Vec3 bg = model.b_g0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) {
      ba += model.sigma_ab * draw();
      bg += model.sigma_gb * draw();
    }
    out[k].f += ba + model.sigma_a * draw();
    out[k].w += bg + model.sigma_g * draw();
  }
  return out;
}

Scenario golden_texting_walk() {
  Scenario s;
  s.profile.step_frequency = 1.9;
  s.profile.step_length = 25.4 / 26.0;
  s.profile.swing_peak_accel = 3.0;
  s.profile.lead_in = 4.0;
  s.profile.lead_out = 4.0;
  s.profile.amplitude_jitter = 0.15;
  s.profile.frequency_jitter = 0.08;
  s.profile.noise_std = 0.05;
  s.profile.seed = 2016;
  s.fs = 100.0;
  s.duration = 21.7;
  return s;
}

Scenario four_segment_heading_walk() {
  constexpr double deg = kPi / 180.0;
  Scenario s;
  s.profile.lead_in = 2.0;
  s.profile.lead_out = 2.0;
  s.profile.noise_std = 0.02;
  s.profile.seed = 6;
  s.profile.heading_script = {{20.0, 0.0}, {21.0, -45.0 * deg}};
  s.profile.device_offset_script = {{10.0, 0.0}, {11.0, 45.0 * deg}, {20.0, 45.0 * deg}, {21.0, 0.0},
                                    {30.0, 0.0}, {31.0, 45.0 * deg}};
  s.fs = 100.0;
  s.duration = 40.0;
  return s;
}

Scenario foot_stride_walk() {
  Scenario s;
  s.profile.step_frequency = 1.0;
  s.profile.step_length = 1.0;
  s.profile.stance_duration = 0.4;
  s.fs = 100.0;
  s.duration = 30.0;
  return s;
}

// ---------------------------------------------------------------------------

void ErrorBudget::validate() const {
  if (!(correction_efficiency >= 0.0 && correction_efficiency <= 1.0))
    throw ValidationError("correction_efficiency must lie in [0, 1]");
  if (!(zupt_interval > 0.0)) throw ValidationError("zupt_interval must be positive");
  if (!(delta_kw >= 0.0)) throw ValidationError("delta_kw must be non-negative");
  if (!(g > 0.0)) throw ValidationError("g must be positive");
  if (!(walk_speed >= 0.0)) throw ValidationError("walk_speed must be non-negative");
}

namespace {

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("assessment time must be non-negative");
}

}  // namespace

double assess_ins_drift(const ErrorBudget& budget, double t) {
  budget.validate();
  require_time(t);
  return 0.5 * std::abs(budget.bias_accel()) * t * t;
}

double assess_pdr_drift(const ErrorBudget& budget, std::span<const pdr::StepEvent> steps, double k_w) {
  budget.validate();
  const double gain_error = budget.delta_kw * k_w;
  double sum = 0.0;
  for (const auto& s : steps) sum += gain_error * s.weinberg_feature();
  return sum;
}

double assess_pdr_drift(const ErrorBudget& budget, double t) {
  budget.validate();
  require_time(t);
  return budget.delta_kw * budget.walk_speed * t;
}

double assess_smins_drift(const ErrorBudget& budget, double t) {
  budget.validate();
  require_time(t);
  const double a = std::abs(budget.bias_accel());
  const double dt = budget.zupt_interval;
  // Count whole intervals with a small tolerance so t = 30, dt = 0.1 gives 300.
  auto full = static_cast<long long>(std::floor(t / dt + 1e-9));
  double rem = t - static_cast<double>(full) * dt;
  if (rem < 0.0) rem = 0.0;

  if (budget.mode == SminsDriftMode::velocity_reset)
    return static_cast<double>(full) * 0.5 * a * dt * dt + 0.5 * a * rem * rem;

  const double keep = 1.0 - budget.correction_efficiency;
  double p = 0.0, v = 0.0;
  for (long long i = 0; i < full; ++i) {
    p += v * dt + 0.5 * a * dt * dt;
    v += a * dt;
    p *= keep;
    v *= keep;
  }
  p += v * rem + 0.5 * a * rem * rem;
  return p;
}

std::vector<DriftRow> drift_table(const ErrorBudget& budget, double t_end, double t_step) {
  budget.validate();
  require_time(t_end);
  if (!(t_step > 0.0)) throw ValidationError("table step must be positive");
  std::vector<DriftRow> rows;
  const auto count = static_cast<long long>(std::floor(t_end / t_step + 1e-9));
  for (long long i = 0; i <= count; ++i) {
    const double t = std::min(t_end, static_cast<double>(i) * t_step);
    rows.push_back({t, assess_ins_drift(budget, t), assess_pdr_drift(budget, t), assess_smins_drift(budget, t)});
  }
  if (rows.back().t < t_end)
    rows.push_back({t_end, assess_ins_drift(budget, t_end), assess_pdr_drift(budget, t_end),
                    assess_smins_drift(budget, t_end)});
  return rows;
}

}  // namespace pedinav::sim
