#include "pedinav/smins.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pedinav::smins {

Vec3 NavState::euler() const {
  const Dcm& c = attitude;
  const double pitch = -std::asin(std::clamp(c(2, 0), -1.0, 1.0));
  return {std::atan2(c(2, 1), c(2, 2)), pitch, std::atan2(c(1, 0), c(0, 0))};
}

NavState strapdown_step(const NavState& state, const ImuSample& sample, double dt, double g) {
  if (!(dt > 0.0) || dt > 0.05) throw ValidationError("strapdown step requires dt in (0, 0.05] s");
  if (!all_finite(sample.f) || !all_finite(sample.w)) throw ValidationError("non-finite IMU sample");
  if (sample.w.norm() * dt >= 2.0) throw ValidationError("Pade step singular: |w| dt >= 2");

  const Mat3 omega_dt = skew(sample.w) * dt;
  const Mat3 two = 2.0 * Mat3::Identity();
  NavState next;
  next.t = state.t + dt;
  next.attitude = state.attitude * (two + omega_dt) * (two - omega_dt).inverse();
  const Vec3 gravity(0.0, 0.0, g);
  next.v = state.v + dt * (next.attitude * sample.f + gravity);
  next.p = state.p + dt * state.v;
  return next;
}

void SensorErrorModel::validate() const {
  if (sigma_a < 0.0 || sigma_g < 0.0 || sigma_ab < 0.0 || sigma_gb < 0.0)
    throw ValidationError("sensor noise STDs must be non-negative");
  if (!all_finite(b_a0) || !all_finite(b_g0)) throw ValidationError("initial biases must be finite");
}

SystemMatrices build_system_matrices(const NavState& state, const ImuSample& sample) {
  SystemMatrices m;
  const Dcm& c = state.attitude;
  m.F.block<3, 3>(kPos, kVel) = Mat3::Identity();
  m.F.block<3, 3>(kVel, kAtt) = -skew(c * sample.f);
  m.F.block<3, 3>(kVel, kAccBias) = c;
  m.F.block<3, 3>(kAtt, kGyroBias) = c;

  m.G.block<3, 3>(kVel, 0) = c;
  m.G.block<3, 3>(kAtt, 3) = c;
  m.G.block<3, 3>(kAccBias, 6) = Mat3::Identity();
  m.G.block<3, 3>(kGyroBias, 9) = Mat3::Identity();
  return m;
}

ErrorStateFilter ErrorStateFilter::from_model(const SensorErrorModel& model, double fs, const FilterInit& init,
                                              double sigma_zvu, double sigma_zar) {
  model.validate();
  if (!(fs > 0.0)) throw ValidationError("filter sampling rate must be positive");
  const double dt = 1.0 / fs;
  ErrorStateFilter f;
  f.P.setZero();
  f.P.diagonal().segment<3>(kPos).setConstant(init.sigma_p * init.sigma_p);
  f.P.diagonal().segment<3>(kVel).setConstant(init.sigma_v * init.sigma_v);
  f.P.diagonal().segment<3>(kAtt).setConstant(init.sigma_att * init.sigma_att);
  f.P.diagonal().segment<3>(kAccBias).setConstant(init.sigma_ba * init.sigma_ba);
  f.P.diagonal().segment<3>(kGyroBias).setConstant(init.sigma_bg * init.sigma_bg);
  // Per-sample STDs converted to densities so that G W G^T dt reproduces them.
  f.W.setZero();
  f.W.diagonal().segment<3>(0).setConstant(model.sigma_a * model.sigma_a * dt);
  f.W.diagonal().segment<3>(3).setConstant(model.sigma_g * model.sigma_g * dt);
  f.W.diagonal().segment<3>(6).setConstant(model.sigma_ab * model.sigma_ab / dt);
  f.W.diagonal().segment<3>(9).setConstant(model.sigma_gb * model.sigma_gb / dt);
  f.R_zvu = Mat3::Identity() * sigma_zvu * sigma_zvu;
  f.R_zar = Mat3::Identity() * sigma_zar * sigma_zar;
  return f;
}

bool CovarianceHealth::ok(double sym_tol, double psd_tol) const {
  return asymmetry <= sym_tol && min_eigenvalue >= -psd_tol * std::abs(trace);
}

CovarianceHealth covariance_health(const Mat15& P) {
  CovarianceHealth h;
  const double n = P.norm();
  h.asymmetry = n > 0.0 ? (P - P.transpose()).norm() / n : 0.0;
  const Mat15 sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat15> es(sym, Eigen::EigenvaluesOnly);
  h.min_eigenvalue = es.eigenvalues().minCoeff();
  h.trace = P.trace();
  return h;
}

namespace {

// Cheap PSD check: a Cholesky factorization of P + tol * trace * I.
void require_psd(const Mat15& P) {
  const double tr = P.trace();
  if (!std::isfinite(tr)) throw NumericalError("covariance has non-finite entries");
  const Mat15 shifted = P + Mat15::Identity() * (1e-9 * std::abs(tr) + 1e-300);
  Eigen::LLT<Mat15> llt(shifted);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance lost positive semi-definiteness");
}

}  // namespace

ErrorStateFilter ekf_predict(ErrorStateFilter filter, const SystemMatrices& m, double dt) {
  if (!(dt > 0.0)) throw ValidationError("prediction step requires dt > 0");
  const Mat15 phi = Mat15::Identity() + m.F * dt;
  const Mat15 q = m.G * filter.W * m.G.transpose() * dt;
  filter.P = phi * filter.P * phi.transpose() + q;
  filter.P = 0.5 * (filter.P + filter.P.transpose());
  filter.dx.setZero();
  require_psd(filter.P);
  return filter;
}

Eigen::MatrixXd kalman_gain(const Mat15& P, const Eigen::MatrixXd& H, const Eigen::MatrixXd& R) {
  if (H.cols() != 15 || R.rows() != H.rows() || R.cols() != H.rows())
    throw ValidationError("measurement matrix dimensions do not match");
  const Eigen::MatrixXd S = H * P * H.transpose() + R;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream msg;
    msg << "ill-conditioned innovation covariance (eigenvalues " << lo << " .. " << hi << ")";
    throw NumericalError(msg.str());
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T with S symmetric.
  return S.ldlt().solve(H * P).transpose();
}

ErrorStateFilter ekf_update(ErrorStateFilter filter, const Eigen::VectorXd& dz, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R) {
  if (dz.size() != H.rows()) throw ValidationError("residual size does not match the measurement matrix");
  const Eigen::MatrixXd K = kalman_gain(filter.P, H, R);
  filter.dx = K * dz;
  const Mat15 ikh = Mat15::Identity() - K * H;
  filter.P = ikh * filter.P;
  filter.P = 0.5 * (filter.P + filter.P.transpose());
  require_psd(filter.P);
  return filter;
}

Injected inject_and_reset(const NavState& state, const Biases& biases, const Vec15& dx) {
  const Vec3 eps = dx.segment<3>(kAtt);
  if (!dx.allFinite()) throw NumericalError("non-finite error-state correction");
  if (eps.norm() >= 0.5) throw NumericalError("misalignment correction too large for the small-angle model");
  Injected out{state, biases};
  out.state.p -= dx.segment<3>(kPos);
  out.state.v -= dx.segment<3>(kVel);
  out.state.attitude = orthonormalize((Mat3::Identity() - skew(eps)) * state.attitude);
  out.biases.b_a += dx.segment<3>(kAccBias);
  out.biases.b_g += dx.segment<3>(kGyroBias);
  return out;
}

Injected inject_and_reset(const NavState& state, const Biases& biases, ErrorStateFilter& filter) {
  Injected out = inject_and_reset(state, biases, filter.dx);
  filter.dx.setZero();
  return out;
}

Measurement zvu_residual(const NavState& state) {
  Measurement m;
  m.dz = state.v;
  m.H.setZero();
  m.H.block<3, 3>(0, kVel) = Mat3::Identity();
  return m;
}

Measurement zar_residual(const ImuSample& sample) {
  Measurement m;
  m.dz = sample.w;
  m.H.setZero();
  m.H.block<3, 3>(0, kGyroBias) = Mat3::Identity();
  return m;
}

SminsResult run_smins(std::span<const ImuSample> stream, const SminsOptions& opts) {
  SminsResult res;
  if (stream.empty()) return res;
  opts.error_model.validate();
  if (opts.stationary_override && opts.stationary_override->size() != stream.size())
    throw ValidationError("stationary override length does not match the stream");

  const double fs = stream.size() > 1 ? 1.0 / (stream[1].t - stream[0].t) : 100.0;
  ErrorStateFilter filter =
      ErrorStateFilter::from_model(opts.error_model, fs, opts.filter_init, opts.sigma_zvu, opts.sigma_zar);
  res.stationary = opts.stationary_override ? *opts.stationary_override : detect_zero_velocity(stream, opts.zvd);

  NavState state = opts.init;
  state.t = stream.front().t;
  Biases biases = opts.init_biases;
  res.states.reserve(stream.size());
  res.states.push_back(state);
  res.innovations.emplace_back();
  res.covariance_trace.push_back(filter.P.trace());
  res.biases.push_back(biases);

  for (std::size_t k = 1; k < stream.size(); ++k) {
    const double dt = stream[k].t - stream[k - 1].t;
    ImuSample corrected = stream[k];
    corrected.f -= biases.b_a;
    corrected.w -= biases.b_g;

    state = strapdown_step(state, corrected, dt, opts.g);
    state.t = stream[k].t;
    if (opts.reorthogonalize_every > 0 && k % static_cast<std::size_t>(opts.reorthogonalize_every) == 0)
      state.attitude = orthonormalize(state.attitude);

    filter = ekf_predict(filter, build_system_matrices(state, corrected), dt);

    Eigen::VectorXd innovation;
    if (res.stationary[k] && opts.aiding.any()) {
      const int rows = 3 * (static_cast<int>(opts.aiding.zvu) + static_cast<int>(opts.aiding.zar));
      Eigen::VectorXd dz(rows);
      Eigen::MatrixXd H(rows, 15);
      Eigen::MatrixXd R = Eigen::MatrixXd::Zero(rows, rows);
      int r = 0;
      if (opts.aiding.zvu) {
        const Measurement m = zvu_residual(state);
        dz.segment<3>(r) = m.dz;
        H.middleRows<3>(r) = m.H;
        R.block<3, 3>(r, r) = filter.R_zvu;
        r += 3;
      }
      if (opts.aiding.zar) {
        const Measurement m = zar_residual(corrected);
        dz.segment<3>(r) = m.dz;
        H.middleRows<3>(r) = m.H;
        R.block<3, 3>(r, r) = filter.R_zar;
      }
      innovation = dz;
      filter = ekf_update(filter, dz, H, R);
      const Injected inj = inject_and_reset(state, biases, filter);
      state = inj.state;
      biases = inj.biases;
    }

    res.states.push_back(state);
    res.innovations.push_back(std::move(innovation));
    res.covariance_trace.push_back(filter.P.trace());
    res.biases.push_back(biases);
  }
  res.covariance_ok = covariance_health(filter.P).ok();
  return res;
}

}  // namespace pedinav::smins
