#include "pedinav/metrics.hpp"
#include "pedinav/sim.hpp"
#include "pedinav/smins.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pedinav;
using namespace pedinav::smins;

namespace {

constexpr double g = kDefaultGravity;

ImuSample level(double t, Vec3 f = Vec3(0, 0, -g), Vec3 w = Vec3::Zero()) { return {t, f, w}; }

}  // namespace

TEST(Strapdown, StationaryStaysPut) {
  NavState s;
  for (int k = 1; k <= 1000; ++k) s = strapdown_step(s, level(k * 0.01), 0.01);
  EXPECT_LE(s.v.norm(), 1e-12);
  EXPECT_LE(s.p.norm(), 1e-12);
  EXPECT_NEAR(s.t, 10.0, 1e-9);
}

TEST(Strapdown, ConstantForwardForce) {
  // v_n = n dt a; p uses the previous velocity: p_n = a dt^2 n (n - 1) / 2.
  NavState s;
  const double dt = 0.01, a = 1.0;
  const int n = 500;
  for (int k = 1; k <= n; ++k) s = strapdown_step(s, level(k * dt, Vec3(a, 0, -g)), dt);
  EXPECT_NEAR(s.v.x(), n * dt * a, 1e-12);
  EXPECT_NEAR(s.p.x(), a * dt * dt * n * (n - 1) / 2.0, 1e-10);
  EXPECT_NEAR(s.v.z(), 0.0, 1e-12);
}

TEST(Strapdown, PadeStepIsCayleyRotation) {
  const double theta = 0.3;  // w dt
  const NavState s = strapdown_step(NavState{}, level(0.1, Vec3(0, 0, -g), Vec3(0, 0, theta / 0.01)), 0.01);
  const double expected = 2.0 * std::atan(theta / 2.0);
  EXPECT_NEAR(std::atan2(s.attitude(1, 0), s.attitude(0, 0)), expected, 1e-14);
  EXPECT_LE((s.attitude.transpose() * s.attitude - Mat3::Identity()).norm(), 1e-14);
}

TEST(Strapdown, Preconditions) {
  EXPECT_THROW(strapdown_step(NavState{}, level(0), 0.0), ValidationError);
  EXPECT_THROW(strapdown_step(NavState{}, level(0), 0.06), ValidationError);
  EXPECT_THROW(strapdown_step(NavState{}, level(0, Vec3(0, 0, -g), Vec3(300, 0, 0)), 0.01), ValidationError);
  EXPECT_THROW(strapdown_step(NavState{}, level(0, Vec3(NAN, 0, 0)), 0.01), ValidationError);
}

TEST(ErrorModel, SystemMatrixBlocks) {
  NavState s;
  s.attitude = Eigen::AngleAxisd(0.4, Vec3::UnitZ()).toRotationMatrix();
  const ImuSample smp = level(0, Vec3(0.5, -0.2, -g));
  const SystemMatrices m = build_system_matrices(s, smp);
  EXPECT_TRUE((m.F.block<3, 3>(kPos, kVel)).isApprox(Mat3::Identity()));
  EXPECT_TRUE((m.F.block<3, 3>(kVel, kAtt)).isApprox(-skew(s.attitude * smp.f)));
  EXPECT_TRUE((m.F.block<3, 3>(kVel, kAccBias)).isApprox(s.attitude));
  EXPECT_TRUE((m.F.block<3, 3>(kAtt, kGyroBias)).isApprox(s.attitude));
  EXPECT_DOUBLE_EQ((m.F.block<3, 3>(kPos, kPos).norm()), 0.0);
  EXPECT_TRUE((m.G.block<3, 3>(kAccBias, 6)).isApprox(Mat3::Identity()));
}

TEST(ErrorModel, NoiseDensitiesFromPerSampleStds) {
  SensorErrorModel e;
  e.sigma_a = 0.02;
  e.sigma_gb = 1e-5;
  const auto f = ErrorStateFilter::from_model(e, 100.0);
  EXPECT_DOUBLE_EQ(f.W(0, 0), 0.02 * 0.02 * 0.01);
  EXPECT_DOUBLE_EQ(f.W(9, 9), 1e-10 / 0.01);
  EXPECT_DOUBLE_EQ(f.R_zvu(0, 0), 1e-4);
  e.sigma_g = -1;
  EXPECT_THROW(ErrorStateFilter::from_model(e, 100.0), ValidationError);
}

TEST(Kalman, ScalarCaseGivesOneHalf) {
  Mat15 P = Mat15::Identity();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(1, 15);
  H(0, 0) = 1.0;
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd K = kalman_gain(P, H, R);
  EXPECT_EQ(K(0, 0), 0.5);
  EXPECT_EQ(K.block(1, 0, 14, 1).norm(), 0.0);

  ErrorStateFilter f;
  f.P = P;
  const auto upd = ekf_update(f, Eigen::VectorXd::Constant(1, 2.0), H, R);
  EXPECT_EQ(upd.dx(0), 1.0);
  EXPECT_EQ(upd.P(0, 0), 0.5);
}

TEST(Kalman, IllConditionedInnovationIsNumericalError) {
  Mat15 P = Mat15::Zero();
  P(3, 3) = 1.0;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 15);
  H.block<3, 3>(0, kVel) = Mat3::Identity();
  EXPECT_THROW(kalman_gain(P, H, Eigen::MatrixXd::Identity(3, 3) * 1e-14), NumericalError);
  EXPECT_THROW(kalman_gain(P, Eigen::MatrixXd::Zero(3, 14), Eigen::MatrixXd::Identity(3, 3)), ValidationError);
}

TEST(Kalman, PredictKeepsSymmetryAndZeroesDx) {
  SensorErrorModel e;
  e.sigma_a = 0.01;
  e.sigma_g = 1e-3;
  ErrorStateFilter f = ErrorStateFilter::from_model(e, 100.0);
  f.dx.setConstant(1.0);
  NavState s;
  s.attitude = Eigen::AngleAxisd(0.3, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  const auto out = ekf_predict(f, build_system_matrices(s, level(0, Vec3(1, 2, -g))), 0.01);
  EXPECT_EQ(out.dx.norm(), 0.0);
  EXPECT_LE((out.P - out.P.transpose()).norm(), 1e-18);
  EXPECT_GT(out.P.trace(), f.P.trace());
}

TEST(Injection, AppliesEveryBlock) {
  NavState s;
  s.p = Vec3(1, 2, 3);
  s.v = Vec3(0.1, 0.2, 0.3);
  Vec15 dx = Vec15::Zero();
  dx.segment<3>(kPos) = Vec3(0.5, 0, 0);
  dx.segment<3>(kVel) = Vec3(0, 0.2, 0);
  dx(kAtt + 2) = 0.01;
  dx.segment<3>(kAccBias) = Vec3(0.1, 0, 0);
  dx.segment<3>(kGyroBias) = Vec3(0, 0, 1e-3);
  const Injected out = inject_and_reset(s, Biases{}, dx);
  EXPECT_TRUE(out.state.p.isApprox(Vec3(0.5, 2, 3)));
  EXPECT_TRUE(out.state.v.isApprox(Vec3(0.1, 0.0, 0.3)));
  EXPECT_NEAR(std::atan2(out.state.attitude(1, 0), out.state.attitude(0, 0)), -0.01, 1e-6);
  EXPECT_DOUBLE_EQ(out.biases.b_a.x(), 0.1);
  EXPECT_DOUBLE_EQ(out.biases.b_g.z(), 1e-3);

  ErrorStateFilter f;
  f.dx = dx;
  inject_and_reset(s, Biases{}, f);
  EXPECT_EQ(f.dx.norm(), 0.0);

  dx(kAtt) = 0.6;
  EXPECT_THROW(inject_and_reset(s, Biases{}, dx), NumericalError);
}

TEST(Measurements, ResidualsAndSelectors) {
  NavState s;
  s.v = Vec3(0.1, -0.2, 0.3);
  const auto zvu = zvu_residual(s);
  EXPECT_TRUE(zvu.dz.isApprox(s.v));
  EXPECT_TRUE((zvu.H.block<3, 3>(0, kVel).isApprox(Mat3::Identity())));
  EXPECT_DOUBLE_EQ(zvu.H.norm(), std::sqrt(3.0));
  const auto zar = zar_residual(level(0, Vec3(0, 0, -g), Vec3(0.01, 0, 0)));
  EXPECT_DOUBLE_EQ(zar.dz.x(), 0.01);
  EXPECT_TRUE((zar.H.block<3, 3>(0, kGyroBias).isApprox(Mat3::Identity())));
}

TEST(Zvd, StationaryAndMovingSamples) {
  ImuStream s;
  for (int k = 0; k < 100; ++k) s.push_back(level(k * 0.01));
  for (int k = 100; k < 200; ++k) s.push_back(level(k * 0.01, Vec3(0, 0, -g), Vec3(0, 0, 2.0)));
  const auto z = zvd_conditions(s);
  EXPECT_TRUE(z.filtered[10]);
  EXPECT_TRUE(z.c1[150]);
  EXPECT_TRUE(z.c2[150]);
  EXPECT_FALSE(z.c3[150]);
  EXPECT_FALSE(z.filtered[150]);

  ZvdConfig printed;
  printed.printed_inequalities = true;
  EXPECT_FALSE(zvd_conditions(s, printed).raw[10]);
}

TEST(Zvd, ConfigValidation) {
  ZvdConfig c;
  c.gamma_fmag_min = 12.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.median_window = 4;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.window = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(MedianFilter, RemovesIsolatedFlipsAndKeepsTies) {
  std::vector<bool> flags(40, true);
  flags[5] = false;
  flags[20] = false;
  const auto out = median_filter(flags, 11);
  EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](bool b) { return b; }));
  // Window of 3 at the edge sees two samples: a tie keeps the sample.
  EXPECT_FALSE(median_filter({false, true, true}, 3)[0]);
  EXPECT_THROW(median_filter(flags, 2), ValidationError);
}

TEST(LikelihoodRatio, StationaryWindowPasses) {
  ImuStream still(11, level(0.0));
  LrtNoiseModel n;
  n.g = g;
  EXPECT_NEAR(shoe_statistic(still, n), 0.0, 1e-12);
  EXPECT_TRUE(likelihood_ratio_zvd(still, n, 1e4, 5, 5));
  ImuStream turning(11, level(0.0, Vec3(0, 0, -g), Vec3(0, 0, 0.5)));
  EXPECT_FALSE(likelihood_ratio_zvd(turning, n, 1e4, 5, 5));
  EXPECT_THROW(likelihood_ratio_zvd(still, n, 1e5, 5, 4), ValidationError);
}

TEST(Pipeline, PerfectSensorsTrackTruth) {
  const auto sc = sim::foot_stride_walk();
  const auto walk = sim::generate_foot_mounted_walk(sc.profile, sc.fs, sc.duration);
  const auto res = run_smins(walk.stream, SminsOptions{});
  ASSERT_EQ(res.states.size(), walk.stream.size());
  EXPECT_LT((res.states.back().p - walk.truth.back().p).norm(), 1e-3);
  EXPECT_TRUE(res.covariance_ok);
  for (std::size_t k = 0; k < res.states.size(); ++k)
    EXPECT_EQ(res.innovations[k].size(), res.stationary[k] && k > 0 ? 3 : 0) << k;
}

TEST(Pipeline, ZarEstimatesGyroBias) {
  ImuStream s;
  for (int k = 0; k <= 2000; ++k) s.push_back(level(k * 0.01, Vec3(0, 0, -g), Vec3(0, 0, 0.01)));
  SminsOptions o;
  o.aiding.zar = true;
  o.filter_init.sigma_bg = 0.05;
  const auto res = run_smins(s, o);
  EXPECT_NEAR(res.biases.back().b_g.z(), 0.01, 1e-4);
  const Vec3 e = res.states.back().euler();
  EXPECT_LT(std::abs(e.z()), 0.01);
}

TEST(Pipeline, OverrideLengthIsChecked) {
  SminsOptions o;
  o.stationary_override = std::vector<bool>(3, true);
  ImuStream s(5, level(0));
  for (int k = 0; k < 5; ++k) s[k].t = k * 0.01;
  EXPECT_THROW(run_smins(s, o), ValidationError);
}
