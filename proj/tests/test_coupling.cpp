// Copyright 2026 The squeezesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "squeezesim/coupling.hpp"
#include "squeezesim/ensemble.hpp"
#include "squeezesim/errors.hpp"

namespace ss = squeezesim;

namespace {

ss::AtomCloud at(ss::Vec3 p) {
  ss::AtomCloud c;
  c.pos = {p};
  c.vel = {ss::Vec3{}};
  return c;
}

ss::CouplingProfile profile_of(std::vector<double> eta) {
  ss::CouplingProfile p;
  p.eta = std::move(eta);
  return p;
}

TEST(CouplingProfile, AtomAtOriginIsFullyCoupled) {
  const auto p = ss::coupling_profile(at({0, 0, 0}), ss::CavityMode{});
  EXPECT_DOUBLE_EQ(p.eta[0], 1.0);
}

TEST(CouplingProfile, GaussianFallOff) {
  ss::CavityMode mode;
  mode.waist_um = 120.0;
  const auto p = ss::coupling_profile(at({120.0 / std::sqrt(2.0), 0, 0}), mode);
  EXPECT_NEAR(p.eta[0], std::exp(-1.0), 1e-15);
}

TEST(CouplingProfile, LongitudinalMismatch) {
  ss::CavityMode mode;
  mode.delta_k = 0.01;
  const auto p = ss::coupling_profile(at({0, 0, 50.0}), mode);
  EXPECT_NEAR(p.eta[0], std::pow(std::cos(0.5), 2), 1e-15);
}

TEST(CouplingProfile, FreeRegimeAveragesStandingWaveToOneHalf) {
  ss::AtomCloud cloud;
  cloud.pos.assign(200000, ss::Vec3{0, 0, 3.0});
  cloud.vel.assign(200000, ss::Vec3{});
  ss::RngStream rng(11, 0);
  const auto p = ss::coupling_profile(cloud, ss::CavityMode::uniform(),
                                      ss::LongitudinalRegime::kFree, rng);
  const auto s = ss::coupling_stats(p);
  // E[cos^2] = 1/2, E[cos^4] = 3/8.
  EXPECT_NEAR(s.mean_eta, 0.5, 4 * std::sqrt(0.125 / 200000.0));
  EXPECT_NEAR(s.mean_eta_sq, 0.375, 0.003);
  for (double e : p.eta) ASSERT_TRUE(e >= 0.0 && e <= 1.0);
}

TEST(CouplingProfile, RejectsInvalidMode) {
  ss::CavityMode mode;
  mode.waist_um = 0.0;
  EXPECT_THROW(ss::coupling_profile(at({0, 0, 0}), mode), ss::InvalidParameter);
  mode = ss::CavityMode{};
  mode.delta_k = -1.0;
  EXPECT_THROW(ss::coupling_profile(at({0, 0, 0}), mode), ss::InvalidParameter);
  EXPECT_THROW(ss::coupling_profile(ss::AtomCloud{}, ss::CavityMode{}),
               ss::InvalidParameter);
}

TEST(CouplingStats, Homogeneous) {
  const auto s = ss::coupling_stats(profile_of(std::vector<double>(100, 1.0)));
  EXPECT_DOUBLE_EQ(s.n_eff, 100.0);
  EXPECT_DOUBLE_EQ(s.p_eff, 0.0);
  EXPECT_DOUBLE_EQ(s.delta_eff, s.delta_0);
  EXPECT_DOUBLE_EQ(s.delta_eff, 5.6);
}

TEST(CouplingStats, TwoAtomFormula) {
  const auto s = ss::coupling_stats(profile_of({1.0, 0.5}));
  EXPECT_NEAR(s.n_eff, 1.8, 1e-15);
  EXPECT_NEAR(s.p_eff, 0.1, 1e-15);
  EXPECT_NEAR(s.mean_eta, 0.75, 1e-15);
  EXPECT_NEAR(s.mean_eta_sq, 0.625, 1e-15);
  EXPECT_NEAR(s.delta_eff, 5.6 * 0.625 / 0.75, 1e-14);
}

TEST(CouplingStats, AllZeroIsDegenerate) {
  EXPECT_THROW(ss::coupling_stats(profile_of({0.0, 0.0, 0.0})), ss::DegenerateError);
}

TEST(CouplingStats, OutOfRangeCouplingRejected) {
  EXPECT_THROW(ss::coupling_stats(profile_of({1.2})), ss::InvalidParameter);
  EXPECT_THROW(ss::coupling_stats(profile_of({-0.1, 1.0})), ss::InvalidParameter);
  EXPECT_THROW(ss::coupling_stats(ss::CouplingProfile{}), ss::InvalidParameter);
}

TEST(CouplingStats, InvariantsOnRandomProfiles) {
  ss::RngStream rng(12, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> eta(1 + rng.below(500));
    for (auto& e : eta) e = rng.uniform();
    eta[0] = 0.5 + 0.5 * rng.uniform();
    const auto s = ss::coupling_stats(profile_of(eta));
    ASSERT_LE(s.mean_eta_sq, s.mean_eta * (1 + 1e-15));
    ASSERT_LE(s.mean_eta * s.mean_eta, s.mean_eta_sq * (1 + 1e-15));
    ASSERT_LE(s.n_eff, static_cast<double>(eta.size()) * (1 + 1e-15));
    ASSERT_GE(s.p_eff, -1e-15);
    ASSERT_LT(s.p_eff, 1.0);
    ASSERT_LE(s.delta_eff, s.delta_0 * (1 + 1e-15));
  }
}

TEST(CouplingStats, ScaleInvariance) {
  ss::RngStream rng(13, 0);
  std::vector<double> eta(1000);
  for (auto& e : eta) e = rng.uniform();
  const auto base = ss::coupling_stats(profile_of(eta));
  for (double c : {1.0, 0.73, 0.2, 1e-3}) {
    std::vector<double> scaled = eta;
    for (auto& e : scaled) e *= c;
    const auto s = ss::coupling_stats(profile_of(scaled));
    EXPECT_NEAR(s.n_eff, base.n_eff, 1e-10 * base.n_eff) << "c = " << c;
    EXPECT_NEAR(s.p_eff, base.p_eff, 1e-12) << "c = " << c;
  }
}

TEST(CouplingStats, EffectiveNumberFullOnlyForEqualCouplings) {
  EXPECT_DOUBLE_EQ(ss::coupling_stats(profile_of(std::vector<double>(7, 0.3))).n_eff, 7.0);
  // Equal nonzero couplings among zeros count every coupled atom fully.
  EXPECT_NEAR(ss::coupling_stats(profile_of({0.4, 0.0, 0.4, 0.0, 0.4})).n_eff, 3.0, 1e-14);
  EXPECT_LT(ss::coupling_stats(profile_of({0.4, 0.41, 0.4})).n_eff, 3.0);
  EXPECT_GT(ss::coupling_stats(profile_of({1.0, 0.9})).p_eff, 0.0);
}

TEST(TwoLevelProfile, RealisesRequestedLoss) {
  for (std::size_t n : {2u, 8u, 101u, 10000u}) {
    for (double p : {0.0, 0.05, 0.1, 0.2, 0.4, 0.7}) {
      if (n == 2 && p > 0.45) continue;
      const auto prof = ss::two_level_profile(n, p);
      ASSERT_EQ(prof.size(), n);
      const auto s = ss::coupling_stats(prof);
      const double grain = p > 0.5 ? 0.5 / static_cast<double>(n) : 1e-11;
      EXPECT_NEAR(s.p_eff, p, grain) << "n = " << n << " p = " << p;
    }
  }
  EXPECT_THROW(ss::two_level_profile(1, 0.1), ss::InvalidParameter);
  EXPECT_THROW(ss::two_level_profile(10, 1.0), ss::InvalidParameter);
}

TEST(ExpectedCoupling, MatchesSampledCloud) {
  ss::CavityMode mode;
  mode.waist_um = 90.0;
  mode.delta_k = 0.002;
  auto summary = ss::thermal_summary(25.0, 17.0, 150.0);
  ss::RngStream rng(14, 0);
  const auto cloud = ss::sample_thermal_cloud(400000, 25.0, 17.0, 150.0, rng);
  const double sampled = ss::coupling_stats(ss::coupling_profile(cloud, mode)).mean_eta;
  EXPECT_NEAR(sampled, ss::expected_coupling(mode, summary).mean_eta(), 1e-3);
}

TEST(CalibrateGeometry, TrappedCloudReachesReferenceCoupling) {
  const auto trapped = ss::thermal_summary(25.0, 17.0, 150.0);
  const auto cal = ss::calibrate_geometry(trapped, 0.9254, 0.2);
  EXPECT_NEAR(cal.achieved.mean_eta(), 0.9254, 1e-9);
  EXPECT_NEAR(cal.achieved.longitudinal, std::pow(0.9254, 0.2), 1e-9);
  ss::RngStream rng(15, 0);
  const auto cloud = ss::sample_thermal_cloud(500000, 25.0, 17.0, 150.0, rng);
  const auto s = ss::coupling_stats(ss::coupling_profile(cloud, cal.mode));
  EXPECT_NEAR(s.mean_eta, 0.9254, 1e-3);
}

TEST(CalibrateGeometry, PurelyTransverseAndPurelyLongitudinalSplits) {
  const auto trapped = ss::thermal_summary(25.0, 17.0, 150.0);
  const auto transverse = ss::calibrate_geometry(trapped, 0.9254, 0.0);
  EXPECT_DOUBLE_EQ(transverse.mode.delta_k, 0.0);
  EXPECT_NEAR(transverse.achieved.mean_eta(), 0.9254, 1e-9);
  const auto longitudinal = ss::calibrate_geometry(trapped, 0.9254, 1.0);
  EXPECT_TRUE(std::isinf(longitudinal.mode.waist_um));
  EXPECT_NEAR(longitudinal.achieved.mean_eta(), 0.9254, 1e-9);
}

TEST(CalibrateGeometry, UnreachableTargetIsDegenerate) {
  const auto trapped = ss::thermal_summary(25.0, 17.0, 150.0);
  EXPECT_THROW(ss::calibrate_geometry(trapped, 0.3, 1.0), ss::DegenerateError);
  EXPECT_THROW(ss::calibrate_geometry(trapped, 1.5, 0.2), ss::InvalidParameter);
}

TEST(CouplingDegradation, LossGrowsWithFreeFallTime) {
  const auto cal = ss::calibrate_geometry(ss::thermal_summary(25.0, 17.0, 150.0), 0.9254, 0.2);
  ss::RngStream rng(16, 0);
  const auto cloud = ss::sample_thermal_cloud(200000, 25.0, 17.0, 150.0, rng);
  double previous = -1.0;
  for (double dt : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const auto flown = ss::free_flight(cloud, dt, ss::GravityConfig{});
    const double p = ss::coupling_stats(ss::coupling_profile(flown, cal.mode)).p_eff;
    EXPECT_GE(p, previous) << "dt = " << dt;
    previous = p;
  }
}

}  // namespace
