#include "pedinav/core.hpp"

#include <cmath>

namespace pedinav {

double Quaternion::norm() const { return std::sqrt(q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("quaternion has zero or non-finite norm");
  return {q1 / n, q2 / n, q3 / n, q4 / n};
}

Quaternion Quaternion::from_heading(double psi) {
  return {std::cos(0.5 * psi), 0.0, 0.0, -std::sin(0.5 * psi)};
}

namespace {

void require_finite(const Quaternion& q, const Vec3& w) {
  if (!q.vec().allFinite() || !all_finite(w)) throw ValidationError("non-finite quaternion or angular rate");
}

}  // namespace

QuatRate quat_derivative(const Quaternion& q, const Vec3& w) {
  require_finite(q, w);
  Eigen::Matrix<double, 4, 3> m;
  m << q.q2, q.q3, q.q4,
      -q.q1, -q.q4, q.q3,
      q.q4, -q.q1, -q.q2,
      -q.q3, q.q2, -q.q1;
  return 0.5 * m * w;
}

QuatRate quat_derivative_legacy(const Quaternion& q, const Vec3& w) {
  require_finite(q, w);
  Eigen::Matrix<double, 4, 3> m;
  m << -q.q2, -q.q3, -q.q4,
      q.q1, q.q4, -q.q3,
      -q.q4, q.q1, q.q2,
      q.q3, -q.q2, -q.q1;
  return 0.5 * m * w;
}

Quaternion quat_integrate(const Quaternion& q, const Vec3& w, double dt) {
  if (!(dt > 0.0) || dt > 0.1) throw ValidationError("quaternion integration step must satisfy 0 < dt <= 0.1 s");
  const QuatRate qd = quat_derivative(q, w);
  Quaternion out{q.q1 + dt * qd[0], q.q2 + dt * qd[1], q.q3 + dt * qd[2], q.q4 + dt * qd[3]};
  return out.normalized();
}

Dcm quat_to_dcm(const Quaternion& q) {
  const double a = q.q1, b = q.q2, c = q.q3, d = q.q4;
  Dcm t;
  t << a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (a * c + b * d),
      2.0 * (b * c + a * d), a * a - b * b + c * c - d * d, 2.0 * (c * d - a * b),
      2.0 * (b * d - a * c), 2.0 * (a * b + c * d), a * a - b * b - c * c + d * d;
  return t;
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
      w.z(), 0.0, -w.x(),
      -w.y(), w.x(), 0.0;
  return s;
}

Dcm orthonormalize(const Dcm& c) {
  Eigen::JacobiSVD<Mat3> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

bool all_finite(const Vec3& v) { return v.allFinite(); }

LowPassFilter::LowPassFilter(double cutoff_hz) : cutoff_hz_(cutoff_hz) {
  if (!(cutoff_hz > 0.0) || !std::isfinite(cutoff_hz)) throw ValidationError("low-pass cutoff must be positive");
}

Vec3 LowPassFilter::step(const Vec3& x, double fs) {
  if (!(fs > 2.0 * cutoff_hz_)) throw ValidationError("sampling rate must exceed twice the low-pass cutoff");
  if (!primed_) {
    state_ = x;
    primed_ = true;
    return state_;
  }
  const double dt = 1.0 / fs;
  const double tau = 1.0 / (2.0 * kPi * cutoff_hz_);
  const double alpha = dt / (tau + dt);
  state_ += alpha * (x - state_);
  return state_;
}

std::vector<Vec3> LowPassFilter::apply(std::span<const Vec3> stream, double fs) {
  std::vector<Vec3> out;
  out.reserve(stream.size());
  for (const auto& x : stream) out.push_back(step(x, fs));
  return out;
}

}  // namespace pedinav
