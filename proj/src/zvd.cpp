#include "pedinav/smins.hpp"

#include <algorithm>
#include <cmath>

namespace pedinav::smins {

void ZvdConfig::validate() const {
  if (!(gamma_fmag_min < gamma_fmag_max)) throw ValidationError("ZVD requires gamma_fmag_min < gamma_fmag_max");
  if (window < 1) throw ValidationError("ZVD variance half-width must be >= 1");
  if (median_window < 1 || median_window % 2 == 0) throw ValidationError("ZVD median window must be odd and >= 1");
  if (gamma_sigma_f < 0.0 || gamma_omega < 0.0) throw ValidationError("ZVD thresholds must be non-negative");
}

std::vector<bool> median_filter(const std::vector<bool>& flags, int window) {
  if (window < 1 || window % 2 == 0) throw ValidationError("median window must be odd and >= 1");
  const auto n = static_cast<std::ptrdiff_t>(flags.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<int> prefix(flags.size() + 1, 0);
  for (std::size_t k = 0; k < flags.size(); ++k) prefix[k + 1] = prefix[k] + (flags[k] ? 1 : 0);
  std::vector<bool> out(flags.size());
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, k + half);
    const int ones = prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
    const int count = static_cast<int>(hi - lo + 1);
    if (2 * ones > count) out[static_cast<std::size_t>(k)] = true;
    else if (2 * ones < count) out[static_cast<std::size_t>(k)] = false;
    else out[static_cast<std::size_t>(k)] = flags[static_cast<std::size_t>(k)];
  }
  return out;
}

ZvdConditions zvd_conditions(std::span<const ImuSample> stream, const ZvdConfig& cfg) {
  cfg.validate();
  const std::size_t n = stream.size();
  ZvdConditions z;
  z.c1.resize(n);
  z.c2.resize(n);
  z.c3.resize(n);
  z.raw.resize(n);

  std::vector<double> fmag(n);
  for (std::size_t k = 0; k < n; ++k) fmag[k] = stream[k].f.norm();

  const auto w = static_cast<std::ptrdiff_t>(cfg.window);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t k = 0; k < sn; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - w);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn - 1, k + w);
    double mean = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) mean += fmag[static_cast<std::size_t>(j)];
    mean /= static_cast<double>(hi - lo + 1);
    double var = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const double d = fmag[static_cast<std::size_t>(j)] - mean;
      var += d * d;
    }
    var /= static_cast<double>(hi - lo + 1);
    const double wmag = stream[uk].w.norm();

    z.c1[uk] = cfg.gamma_fmag_min < fmag[uk] && fmag[uk] < cfg.gamma_fmag_max;
    if (cfg.printed_inequalities) {
      z.c2[uk] = var > cfg.gamma_sigma_f;
      z.c3[uk] = var > cfg.gamma_omega;
    } else {
      z.c2[uk] = var < cfg.gamma_sigma_f;
      z.c3[uk] = wmag < cfg.gamma_omega;
    }
    z.raw[uk] = z.c1[uk] && z.c2[uk] && z.c3[uk];
  }
  z.filtered = median_filter(z.raw, cfg.median_window);
  return z;
}

std::vector<bool> detect_zero_velocity(std::span<const ImuSample> stream, const ZvdConfig& cfg) {
  return zvd_conditions(stream, cfg).filtered;
}

double shoe_statistic(std::span<const ImuSample> window, const LrtNoiseModel& noise) {
  if (window.empty()) throw ValidationError("likelihood-ratio window is empty");
  if (!(noise.sigma_a > 0.0) || !(noise.sigma_g > 0.0)) throw ValidationError("LRT noise STDs must be positive");
  Vec3 mean = Vec3::Zero();
  for (const auto& s : window) mean += s.f;
  mean /= static_cast<double>(window.size());
  const double mn = mean.norm();
  const Vec3 dir = mn > 0.0 ? Vec3(mean / mn) : Vec3(0.0, 0.0, -1.0);
  const double ia = 1.0 / (noise.sigma_a * noise.sigma_a);
  const double ig = 1.0 / (noise.sigma_g * noise.sigma_g);
  double t = 0.0;
  for (const auto& s : window) t += ia * (s.f - noise.g * dir).squaredNorm() + ig * s.w.squaredNorm();
  return t / static_cast<double>(window.size());
}

bool likelihood_ratio_zvd(std::span<const ImuSample> window, const LrtNoiseModel& noise, double gamma, int w_b,
                          int w_f) {
  if (w_b < 0 || w_f < 0) throw ValidationError("window lengths must be non-negative");
  if (window.size() != static_cast<std::size_t>(w_b + w_f + 1))
    throw ValidationError("likelihood-ratio window must hold w_b + w_f + 1 samples");
  return shoe_statistic(window, noise) < gamma;
}

}  // namespace pedinav::smins
