// Shoe-mounted INS: strapdown mechanization, 15-state error-state EKF,
// zero-velocity detection and zero-velocity / zero-angular-rate aiding.

#pragma once

#include "pedinav/core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pedinav::smins {

using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

// Error-state layout: [dp, dv, eps, b_a, b_g].
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAtt = 6;
inline constexpr int kAccBias = 9;
inline constexpr int kGyroBias = 12;

/// Nominal navigation state.
///
/// `attitude` is the matrix that takes body-frame vectors to the reference
/// frame: velocity rate is attitude * f + g and the Pade update multiplies it
/// on the right. Its transpose is the reference-to-body matrix.
struct NavState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Dcm attitude = Dcm::Identity();

  /// Roll, pitch, yaw (rad) of the body relative to the reference frame.
  Vec3 euler() const;
};

/// One strapdown step: Pade attitude update, then velocity with the new
/// attitude, then position with the previous velocity.
/// Requires dt in (0, 0.05] and |w| dt < 2.
NavState strapdown_step(const NavState& state, const ImuSample& sample, double dt, double g = kDefaultGravity);

/// Sensor noise and bias model.
///
/// sigma_a / sigma_g: white-noise STD per sample. sigma_ab / sigma_gb: STD of
/// the per-sample bias random-walk increment. b_a0 / b_g0: initial biases.
struct SensorErrorModel {
  double sigma_a = 0.0;  // m/s^2
  double sigma_g = 0.0;  // rad/s
  double sigma_ab = 0.0;  // m/s^2 per sample
  double sigma_gb = 0.0;  // rad/s per sample
  Vec3 b_a0 = Vec3::Zero();
  Vec3 b_g0 = Vec3::Zero();

  void validate() const;
};

struct SystemMatrices {
  Mat15 F = Mat15::Zero();
  Mat15x12 G = Mat15x12::Zero();
};

/// Linearized error dynamics around the nominal state. F_vp = 0 and
/// F_veps = -skew(C f); G holds the attitude matrix on the white-noise blocks
/// and identities on the bias-driving blocks.
SystemMatrices build_system_matrices(const NavState& state, const ImuSample& sample);

/// Initial 1-sigma uncertainties for the error state.
struct FilterInit {
  double sigma_p = 1e-3;  // m
  double sigma_v = 1e-3;  // m/s
  double sigma_att = 1e-3;  // rad
  double sigma_ba = 0.05;  // m/s^2
  double sigma_bg = 1e-3;  // rad/s
};

struct ErrorStateFilter {
  Vec15 dx = Vec15::Zero();
  Mat15 P = Mat15::Identity();
  /// Noise density of w = [w_a, w_g, w_ab, w_gb] (units^2 * s).
  Mat12 W = Mat12::Zero();
  Mat3 R_zvu = Mat3::Identity() * 1e-4;
  Mat3 R_zar = Mat3::Identity() * 1e-4;

  /// Filter tuned from a sensor model at nominal rate fs.
  static ErrorStateFilter from_model(const SensorErrorModel& model, double fs, const FilterInit& init = {},
                                     double sigma_zvu = 0.01, double sigma_zar = 0.01);
};

/// Covariance health numbers.
struct CovarianceHealth {
  double asymmetry = 0.0;  // |P - P^T| / |P|
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool ok(double sym_tol = 1e-10, double psd_tol = 1e-9) const;
};

CovarianceHealth covariance_health(const Mat15& P);

/// Phi = I + F dt, Q = G W G^T dt, P- = Phi P Phi^T + Q, dx- = 0.
/// Throws NumericalError when P- is not PSD within tolerance.
ErrorStateFilter ekf_predict(ErrorStateFilter filter, const SystemMatrices& m, double dt);

/// K = P H^T (H P H^T + R)^-1, dx+ = K dz, P+ = (I - K H) P, symmetrized.
/// Throws NumericalError when the innovation covariance has a condition number above 1e12.
ErrorStateFilter ekf_update(ErrorStateFilter filter, const Eigen::VectorXd& dz, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R);

/// Kalman gain alone, for inspection.
Eigen::MatrixXd kalman_gain(const Mat15& P, const Eigen::MatrixXd& H, const Eigen::MatrixXd& R);

struct Biases {
  Vec3 b_a = Vec3::Zero();
  Vec3 b_g = Vec3::Zero();
};

struct Injected {
  NavState state;
  Biases biases;
};

/// Closed-loop correction: p -= dp, v -= dv, attitude <- (I - skew(eps)) attitude
/// (re-orthogonalized), biases += db. Requires |eps| < 0.5 rad.
Injected inject_and_reset(const NavState& state, const Biases& biases, const Vec15& dx);

/// Same, and zeroes the filter's error state.
Injected inject_and_reset(const NavState& state, const Biases& biases, ErrorStateFilter& filter);

struct Measurement {
  Eigen::Vector3d dz;
  Eigen::Matrix<double, 3, 15> H;
};

/// Zero-velocity residual: dz = v, H = [0 I 0 0 0].
Measurement zvu_residual(const NavState& state);

/// Zero-angular-rate residual: dz = w, H = [0 0 0 0 I].
Measurement zar_residual(const ImuSample& sample);

// ---------------------------------------------------------------------------
// Zero-velocity detection

struct ZvdConfig {
  double gamma_fmag_min = 9.0;  // m/s^2
  double gamma_fmag_max = 11.0;  // m/s^2
  double gamma_sigma_f = 0.5;  // (m/s^2)^2
  double gamma_omega = 0.6;  // rad/s
  int window = 7;  // half-width w; the variance uses 2w + 1 samples
  int median_window = 11;
  /// Use the inequalities as printed (variance above its threshold for C2, and
  /// the variance compared against the rate threshold for C3) instead of the
  /// stationary reading.
  bool printed_inequalities = false;

  void validate() const;
};

struct ZvdConditions {
  std::vector<bool> c1, c2, c3, raw, filtered;
};

/// All three conditions, their AND, and the median-filtered result.
ZvdConditions zvd_conditions(std::span<const ImuSample> stream, const ZvdConfig& cfg = {});

/// Per-sample stationary flags (median-filtered C1 & C2 & C3).
std::vector<bool> detect_zero_velocity(std::span<const ImuSample> stream, const ZvdConfig& cfg = {});

/// Centered majority vote over `window` samples, truncated at the edges; a tie
/// keeps the sample's own value.
std::vector<bool> median_filter(const std::vector<bool>& flags, int window);

struct LrtNoiseModel {
  double sigma_a = 0.01;  // m/s^2
  double sigma_g = 0.1 * kPi / 180.0;  // rad/s
  double g = kDefaultGravity;
};

/// Stance-hypothesis log-likelihood statistic over a window:
/// mean_k |f_k - g f_bar/|f_bar||^2 / sigma_a^2 + |w_k|^2 / sigma_g^2.
double shoe_statistic(std::span<const ImuSample> window, const LrtNoiseModel& noise);

/// Stationary iff shoe_statistic(window) < gamma. The window must hold
/// w_b + w_f + 1 samples.
bool likelihood_ratio_zvd(std::span<const ImuSample> window, const LrtNoiseModel& noise, double gamma,
                          int w_b, int w_f);

// ---------------------------------------------------------------------------
// Closed-loop pipeline

struct AidingSet {
  bool zvu = true;
  bool zar = false;
  bool any() const { return zvu || zar; }
};

struct SminsOptions {
  NavState init;
  Biases init_biases;
  SensorErrorModel error_model;
  FilterInit filter_init;
  double sigma_zvu = 0.01;  // m/s
  double sigma_zar = 0.01;  // rad/s
  ZvdConfig zvd;
  AidingSet aiding;
  double g = kDefaultGravity;
  int reorthogonalize_every = 100;
  /// Replaces the detector output (e.g. a ground-truth stance mask).
  std::optional<std::vector<bool>> stationary_override;
};

struct SminsResult {
  std::vector<NavState> states;
  std::vector<bool> stationary;
  /// Pre-update residual at aided epochs (empty vector otherwise).
  std::vector<Eigen::VectorXd> innovations;
  std::vector<double> covariance_trace;
  std::vector<Biases> biases;
  bool covariance_ok = true;
};

/// Strapdown propagation with EKF prediction every sample and aiding updates
/// whenever the stationary flag is set. Sample 0 carries the initial state.
SminsResult run_smins(std::span<const ImuSample> stream, const SminsOptions& opts);

}  // namespace pedinav::smins
