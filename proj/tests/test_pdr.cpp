#include "pedinav/pdr.hpp"
#include "pedinav/sim.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pedinav;
using pedinav::testing::magnitude_stream;

namespace {

pdr::StepEvent event(double fmax, double fmin, double sf, double sigma) {
  pdr::StepEvent e;
  e.f_mag_max = fmax;
  e.f_mag_min = fmin;
  e.step_frequency = sf;
  e.duration = 1.0 / sf;
  e.sigma_f = sigma;
  return e;
}

ImuStream golden() {
  const auto s = sim::golden_texting_walk();
  return sim::generate_handheld_walk(s.profile, s.fs, s.duration).stream;
}

}  // namespace

TEST(ForceStats, MeanAndBothSigmas) {
  ImuStream s = {{0.0, Vec3(0, 0, -9), Vec3::Zero()}, {0.01, Vec3(0, 0, -11), Vec3::Zero()}};
  const auto st = pdr::specific_force_stats(s);
  EXPECT_DOUBLE_EQ(st.mean, 10.0);
  EXPECT_DOUBLE_EQ(st.sigma_f, 1.0);
  EXPECT_DOUBLE_EQ(st.sigma_f_double_centered, std::sqrt(101.0));
  EXPECT_THROW(pdr::specific_force_stats({}), ValidationError);
}

TEST(StepDetection, PureSinusoidNeedsLowerFactor) {
  // sigma of A sin is A / sqrt(2), so 1.5 sigma sits above the peaks.
  const auto s = magnitude_stream(100.0, 10.0, [](double t) { return 9.81 + 3.0 * std::sin(2 * kPi * 2.0 * t); });
  EXPECT_EQ(pdr::detect_steps(s).steps.size(), 0u);
  pdr::StepDetectorConfig cfg;
  cfg.peak_height_factor = 1.0;
  const auto det = pdr::detect_steps(s, cfg);
  ASSERT_EQ(det.steps.size(), 20u);
  EXPECT_NEAR(det.steps[0].t_peak, 0.12, 0.011);
  EXPECT_NEAR(det.steps[5].step_frequency, 2.0, 0.1);
}

TEST(StepDetection, StandingStillHasNoSteps) {
  EXPECT_TRUE(pdr::detect_steps(magnitude_stream(100, 10, [](double) { return 9.81; })).steps.empty());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.02);
  EXPECT_TRUE(pdr::detect_steps(magnitude_stream(100, 10, [&](double) { return 9.81 + n(rng); })).steps.empty());
}

TEST(StepDetection, GoldenWalkHas26Steps) {
  const auto det = pdr::detect_steps(golden());
  EXPECT_EQ(det.steps.size(), 26u);
  EXPECT_TRUE(det.warnings.empty());
}

TEST(StepDetection, CountInvariantUnderScaling) {
  const ImuStream base = golden();
  for (double c : {0.5, 2.0, 3.7}) {
    ImuStream s = base;
    for (auto& smp : s) smp.f *= c;
    EXPECT_EQ(pdr::detect_steps(s).steps.size(), 26u) << "scale " << c;
  }
}

TEST(StepDetection, CloseCandidatesKeepTheTaller) {
  // Peaks of 4 and 5 m/s^2 0.1 s apart, then one of 4 a second later.
  const auto s = magnitude_stream(100.0, 4.0, [](double t) {
    double m = 9.81;
    if (std::abs(t - 1.0) < 1e-9) m += 4.0;
    if (std::abs(t - 1.1) < 1e-9) m += 5.0;
    if (std::abs(t - 2.1) < 1e-9) m += 4.0;
    return m;
  });
  const auto det = pdr::detect_steps(s);
  ASSERT_EQ(det.steps.size(), 2u);
  EXPECT_NEAR(det.steps[0].t_peak, 1.1, 1e-9);
  EXPECT_NEAR(det.steps[1].t_peak, 2.1, 1e-9);
  EXPECT_NEAR(det.steps[1].duration, 1.0, 1e-9);
  EXPECT_NEAR(det.steps[1].peak_to_peak(), 4.0, 1e-9);
}

TEST(StepDetection, PlateauResolvesToFirstSample) {
  const auto s = magnitude_stream(100.0, 2.0, [](double t) { return (t > 0.995 && t < 1.035) ? 14.0 : 9.81; });
  const auto det = pdr::detect_steps(s);
  ASSERT_EQ(det.steps.size(), 1u);
  EXPECT_NEAR(det.steps[0].t_peak, 1.0, 1e-9);
}

TEST(StepDetection, WarnsOnGapsAndLowRate) {
  ImuStream s = magnitude_stream(10.0, 3.0, [](double) { return 9.81; });
  s.back().t += 1.0;
  const auto det = pdr::detect_steps(s);
  ASSERT_EQ(det.warnings.size(), 2u);
}

TEST(StepLength, ConstantModel) {
  EXPECT_NEAR(pdr::step_length_constant(1.90, pdr::Gender::male), 0.7885, 1e-12);
  EXPECT_NEAR(pdr::step_length_constant(1.60, pdr::Gender::female), 0.413 * 1.60, 1e-12);
  EXPECT_THROW(pdr::step_length_constant(0.4, pdr::Gender::male), ValidationError);
  EXPECT_THROW(pdr::step_length_constant(2.6, pdr::Gender::male), ValidationError);
}

TEST(StepLength, WeinbergFourthRoot) {
  EXPECT_DOUBLE_EQ(pdr::step_length_weinberg(event(26.0, 10.0, 2, 1), 0.5), 1.0);
  EXPECT_THROW(pdr::step_length_weinberg(event(1.0, 2.0, 2, 1), 0.5), ValidationError);
  EXPECT_THROW(pdr::step_length_weinberg(event(2.0, 1.0, 2, 1), 0.0), ValidationError);
}

TEST(StepLength, AdaptiveLinearAndClamped) {
  pdr::StepLengthGains g;
  g.k_a1 = 0.3;
  g.k_a2 = 0.1;
  g.k_a3 = 0.05;
  EXPECT_DOUBLE_EQ(pdr::step_length_adaptive(event(12, 8, 2.0, 1.5), g), 0.3 * 2.0 + 0.1 * 1.5 + 0.05);
  g.k_a3 = -5.0;
  EXPECT_DOUBLE_EQ(pdr::step_length_adaptive(event(12, 8, 2.0, 1.5), g), 0.0);
}

TEST(Calibration, WeinbergIsExactInTheSum) {
  const std::vector<pdr::StepEvent> steps = {event(26, 10, 2, 1), event(91, 10, 2, 1)};  // features 2 and 3
  const auto cal = pdr::calibrate_gains(steps, 10.0, pdr::StepModel::weinberg);
  EXPECT_DOUBLE_EQ(cal.gains.k_w, 2.0);
  EXPECT_THROW(pdr::calibrate_gains(steps, 0.0, pdr::StepModel::weinberg), ValidationError);
  EXPECT_THROW(pdr::calibrate_gains({}, 1.0, pdr::StepModel::weinberg), ValidationError);
  const std::vector<pdr::StepEvent> flat = {event(10, 10, 2, 1)};
  EXPECT_THROW(pdr::calibrate_gains(flat, 1.0, pdr::StepModel::weinberg), ValidationError);
}

TEST(Calibration, AdaptiveReproducesDistanceWithIntercept) {
  // With a constant column the least-squares residuals sum to zero, so the
  // fitted lengths add up to the known distance.
  std::vector<pdr::StepEvent> steps;
  for (int j = 0; j < 12; ++j)
    steps.push_back(event(12.0 + 0.3 * j, 7.5 - 0.1 * (j % 3), 1.7 + 0.05 * (j % 4), 1.0 + 0.07 * (j % 5)));
  const auto cal = pdr::calibrate_gains(steps, 9.0, pdr::StepModel::adaptive);
  EXPECT_EQ(cal.rank, 3);
  double total = 0.0;
  for (const auto& s : steps) total += pdr::step_length_adaptive(s, cal.gains);
  EXPECT_NEAR(total, 9.0, 1e-9);
}

TEST(Calibration, AdaptiveRankPolicy) {
  const std::vector<pdr::StepEvent> same(5, event(13, 8, 1.9, 1.2));
  EXPECT_THROW(pdr::calibrate_gains(same, 5.0, pdr::StepModel::adaptive), ValidationError);
  const auto cal = pdr::calibrate_gains(same, 5.0, pdr::StepModel::adaptive, pdr::RankPolicy::min_norm);
  EXPECT_EQ(cal.rank, 1);
  EXPECT_NEAR(pdr::step_length_adaptive(same[0], cal.gains), 1.0, 1e-9);
  EXPECT_THROW(pdr::calibrate_gains(same, 5.0, pdr::StepModel::constant), ValidationError);
}

TEST(Heading, QuaternionRoundTrip) {
  for (double psi : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    const auto h = pdr::heading_from_quaternion(Quaternion::from_heading(psi));
    EXPECT_NEAR(h.psi, psi, 1e-12);
    EXPECT_FALSE(h.low_confidence);
  }
  // Pitched straight up: heading is undefined.
  const Quaternion up{std::cos(kPi / 4), 0.0, std::sin(kPi / 4), 0.0};
  EXPECT_TRUE(pdr::heading_from_quaternion(up).low_confidence);
}

TEST(Heading, GravityAxisRateOnly) {
  // Device on its side: gravity lies along body x, so only w_x turns the walker.
  ImuStream s;
  for (int k = 0; k <= 200; ++k) s.push_back({k * 0.01, Vec3(-9.81, 0, 0), Vec3(0.5, 0, 0.8)});
  LowPassFilter lpf(1.0);
  const auto psi = pdr::walking_direction_gravity(s, lpf, 0.2);
  EXPECT_DOUBLE_EQ(psi.front(), 0.2);
  EXPECT_NEAR(psi.back(), 0.2 + 0.5 * 2.0, 1e-12);
}

TEST(Heading, FreeFallIsRejected) {
  ImuStream s = {{0.0, Vec3::Zero(), Vec3::Zero()}, {0.01, Vec3::Zero(), Vec3::Zero()}};
  LowPassFilter lpf(1.0);
  EXPECT_THROW(pdr::walking_direction_gravity(s, lpf, 0.0), ValidationError);
}

TEST(Position, PlanarUpdate) {
  const auto p = pdr::position_update_2d({1.0, 2.0}, 2.0, kPi / 2);
  EXPECT_NEAR(p.x, 1.0, 1e-15);
  EXPECT_NEAR(p.y, 4.0, 1e-15);
  EXPECT_THROW(pdr::position_update_2d({}, -1.0, 0.0), ValidationError);
}

TEST(RunPdr, NoStepsIsAWarningNotAnError) {
  pdr::PdrOptions o;
  o.model = pdr::StepModel::constant;
  const auto res = pdr::run_pdr(magnitude_stream(100, 5, [](double) { return 9.81; }), o);
  EXPECT_TRUE(res.steps.empty());
  ASSERT_EQ(res.track.size(), 1u);
  ASSERT_FALSE(res.warnings.empty());
}

TEST(RunPdr, GravityModeMatchesAhrsForLevelDevice) {
  const auto sc = sim::four_segment_heading_walk();
  const auto w = sim::generate_handheld_walk(sc.profile, sc.fs, sc.duration);
  pdr::PdrOptions o;
  o.model = pdr::StepModel::constant;
  o.detector.peak_height_factor = 1.0;
  const auto a = pdr::run_pdr(w.stream, o);
  o.heading_mode = pdr::HeadingMode::gravity_offset;
  const auto g = pdr::run_pdr(w.stream, o);
  ASSERT_EQ(a.steps.size(), g.steps.size());
  for (std::size_t j = 0; j < a.steps.size(); ++j) EXPECT_NEAR(angle_diff(a.steps[j].heading, g.steps[j].heading), 0, 1e-4);
}
