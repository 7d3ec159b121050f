// Shared math types for the pedestrian navigation pipelines.
//
// Frames: the reference frame is local-level, fixed at the start point, with
// the z-axis pointing down so that gravity is g^r = [0, 0, g]. Body frames
// follow the same forward/right/down layout when the sensor is level.

#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pedinav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Direction cosine matrix. See smins::NavState for which direction it maps.
using Dcm = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultGravity = 9.81;

/// Bad input: malformed data, violated preconditions, inconsistent config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical-health check failed (non-PSD covariance, ill-conditioned update).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImuSample {
  double t = 0.0;  // s
  Vec3 f = Vec3::Zero();  // specific force, m/s^2, body frame
  Vec3 w = Vec3::Zero();  // angular rate, rad/s, body frame
};

using ImuStream = std::vector<ImuSample>;

/// Unit quaternion, scalar first: q1 + q2 i + q3 j + q4 k.
///
/// The quaternion parameterizes the reference-to-body matrix produced by
/// quat_to_dcm(), and heading is read from it with
/// atan2(2(q2q3 - q1q4), 1 - 2(q3^2 + q4^2)). A positive body z-rate therefore
/// increases the extracted heading.
struct Quaternion {
  double q1 = 1.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;

  double norm() const;
  Quaternion normalized() const;
  Quaternion operator-() const { return {-q1, -q2, -q3, -q4}; }
  Eigen::Vector4d vec() const { return {q1, q2, q3, q4}; }

  static Quaternion identity() { return {}; }
  /// Level attitude with the given heading (rad).
  static Quaternion from_heading(double psi);
};

using QuatRate = Eigen::Vector4d;

/// Quaternion rate for body angular rate w (rad/s).
///
/// Rows: [ q2  q3  q4; -q1 -q4  q3; q4 -q1 -q2; -q3  q2 -q1 ] * w / 2.
/// This is the rate that keeps quat_to_dcm() and the heading formula
/// consistent. For the identity quaternion and w = (0, 0, 1) it gives
/// (0, 0, 0, -0.5).
QuatRate quat_derivative(const Quaternion& q, const Vec3& w);

/// A legacy form of the rate matrix found in some references:
/// [ -q2 -q3 -q4; q1 q4 -q3; -q4 q1 q2; q3 -q2 -q1 ] * w / 2.
///
/// Kept for comparison only: its first and last rows are not mutually
/// consistent, so integrating it about z grows (q1, q4) hyperbolically
/// instead of rotating them.
QuatRate quat_derivative_legacy(const Quaternion& q, const Vec3& w);

/// Explicit Euler step on quat_derivative() followed by renormalization.
/// Requires 0 < dt <= 0.1 s.
Quaternion quat_integrate(const Quaternion& q, const Vec3& w, double dt);

/// Reference-to-body transformation matrix of a unit quaternion.
Dcm quat_to_dcm(const Quaternion& q);

/// Cross-product matrix: skew(w) * v == w.cross(v).
Mat3 skew(const Vec3& w);

/// Nearest orthogonal matrix (symmetric orthogonalization, C (C^T C)^(-1/2)).
Dcm orthonormalize(const Dcm& c);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Circular difference a - b wrapped to (-pi, pi].
double angle_diff(double a, double b);

bool all_finite(const Vec3& v);

/// First-order IIR low-pass, applied independently per axis.
///
/// alpha = dt / (tau + dt) with tau = 1 / (2 pi cutoff). The filter state is
/// primed with the first sample it sees, so a constant input passes through
/// unchanged from the start.
class LowPassFilter {
 public:
  explicit LowPassFilter(double cutoff_hz = 1.0);

  double cutoff_hz() const { return cutoff_hz_; }

  /// Filters one sample at sampling rate fs (Hz). Throws ValidationError when
  /// fs <= 2 * cutoff.
  Vec3 step(const Vec3& x, double fs);

  std::vector<Vec3> apply(std::span<const Vec3> stream, double fs);

  void reset() { primed_ = false; }
  bool primed() const { return primed_; }
  const Vec3& state() const { return state_; }

 private:
  double cutoff_hz_;
  Vec3 state_ = Vec3::Zero();
  bool primed_ = false;
};

}  // namespace pedinav
