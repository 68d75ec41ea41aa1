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

#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"
#include "squeezesim/stats.hpp"

namespace ss = squeezesim;
namespace st = squeezesim::stats;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  ss::RngStream rng(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = sd * rng.normal();
  return v;
}

TEST(Basics, MeanAndVariance) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(st::mean(v), 2.5);
  EXPECT_DOUBLE_EQ(st::sample_variance(v), 5.0 / 3.0);
  EXPECT_THROW(st::mean(std::vector<double>{}), ss::InvalidParameter);
  EXPECT_THROW(st::sample_variance(std::vector<double>{1.0}), ss::InvalidParameter);
}

TEST(Basics, StudentQuantile) {
  // Large dof approaches the normal one-sigma point.
  EXPECT_NEAR(st::t_one_sigma(1e7), 1.0, 1e-6);
  // dof = 1: Cauchy quantile tan(pi (q - 1/2)).
  EXPECT_NEAR(st::t_one_sigma(1.0), std::tan(kPi * 0.5 * st::kOneSigmaProbability), 1e-10);
}

TEST(BootstrapStd, StandardErrorOfGaussianSampleStd) {
  const auto v = gaussian(700, 61);
  ss::RngStream rng(62, 0);
  const auto r = st::bootstrap_std(v, rng);
  EXPECT_EQ(r.n_resamples, 10000u);
  EXPECT_NEAR(r.std_error, 1.0 / std::sqrt(2.0 * 699.0), 0.1 / std::sqrt(2.0 * 699.0));
  EXPECT_DOUBLE_EQ(r.point_estimate, st::sample_std(v));
  EXPECT_LE(r.ci68_low, r.point_estimate);
  EXPECT_GE(r.ci68_high, r.point_estimate);
  EXPECT_NEAR(r.ci68_high - r.point_estimate, r.std_error, 1e-15);
}

TEST(BootstrapStd, ConstantSample) {
  const std::vector<double> v(50, 3.25);
  ss::RngStream rng(63, 0);
  const auto r = st::bootstrap_std(v, rng, 500);
  EXPECT_EQ(r.point_estimate, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.ci68_low, r.ci68_high);
}

TEST(BootstrapStd, DeterministicForFixedStream) {
  const auto v = gaussian(300, 64);
  ss::RngStream a(65, 0);
  ss::RngStream b(65, 0);
  EXPECT_EQ(st::bootstrap_std(v, a, 2000).std_error, st::bootstrap_std(v, b, 2000).std_error);
}

TEST(BootstrapStd, WidthScalesAsInverseRootN) {
  double previous = 0.0;
  for (std::size_t n : {100u, 400u, 1600u}) {
    double w = 0.0;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      const auto v = gaussian(n, 1000 * n + rep);
      ss::RngStream rng(67, 1000 * n + rep);
      w += st::bootstrap_std(v, rng, 1000).std_error / 10.0;
    }
    if (previous > 0.0) EXPECT_NEAR(previous / w, 2.0, 0.4) << "n = " << n;
    previous = w;
  }
}

TEST(BootstrapStd, TooFewSamples) {
  ss::RngStream rng(1, 0);
  EXPECT_THROW(st::bootstrap_std(std::vector<double>(9, 1.0), rng), ss::InvalidParameter);
}

TEST(FitZeroIntercept, ExactLine) {
  const std::vector<double> x{-2, -1, 1, 2, 3};
  const auto f = st::fit_zero_intercept(x, x);
  EXPECT_DOUBLE_EQ(f.slope, 1.0);
  EXPECT_EQ(f.intercept, 0.0);
  EXPECT_EQ(f.residual_variance, 0.0);
  EXPECT_EQ(f.slope_ci68, 0.0);
}

TEST(FitZeroIntercept, SingleNonzeroAbscissa) {
  const auto f = st::fit_zero_intercept(std::vector<double>{0.0, 2.0}, std::vector<double>{5.0, 3.0});
  EXPECT_DOUBLE_EQ(f.slope, 1.5);
}

TEST(FitZeroIntercept, NoisyFixtureWithinInterval) {
  ss::RngStream rng(68, 0);
  std::vector<double> x;
  std::vector<double> y;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    x.push_back(0.1 * i);
    y.push_back(2.0 * 0.1 * i + 0.05 * rng.normal());
  }
  const auto f = st::fit_zero_intercept(x, y);
  EXPECT_NEAR(f.slope, 2.0, 3.0 * f.slope_ci68);
  EXPECT_GT(f.slope_ci68, 0.0);
  EXPECT_EQ(f.intercept, 0.0);
}

TEST(FitZeroIntercept, InvariantUnderCommonRescaling) {
  ss::RngStream rng(69, 0);
  std::vector<double> x(30);
  std::vector<double> y(30);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 0.7 * x[i] + 0.1 * rng.normal();
  }
  const double base = st::fit_zero_intercept(x, y).slope;
  for (double c : {1e-3, 0.5, 40.0}) {
    auto xs = x;
    auto ys = y;
    for (auto& v : xs) v *= c;
    for (auto& v : ys) v *= c;
    EXPECT_NEAR(st::fit_zero_intercept(xs, ys).slope, base, 1e-12);
  }
}

TEST(FitZeroIntercept, Degenerate) {
  EXPECT_THROW(st::fit_zero_intercept(std::vector<double>{0, 0}, std::vector<double>{1, 2}),
               ss::DegenerateError);
  EXPECT_THROW(st::fit_zero_intercept(std::vector<double>{1}, std::vector<double>{1}),
               ss::InvalidParameter);
}

TEST(FitLinear, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(3 * v + 1);
  const auto f = st::fit_linear(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(FitLinear, CentredSymmetricDataGivesMeanIntercept) {
  const std::vector<double> x{-2, -1, 0, 1, 2};
  const std::vector<double> y{1.0, 4.0, 2.0, 0.5, 3.5};
  EXPECT_NEAR(st::fit_linear(x, y).intercept, st::mean(y), 1e-15);
}

TEST(FitLinear, NoisyFixtureWithinInterval) {
  ss::RngStream rng(70, 0);
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 25; ++i) {
    x.push_back(i);
    y.push_back(-0.4 * i + 7.0 + 0.3 * rng.normal());
  }
  const auto f = st::fit_linear(x, y);
  EXPECT_NEAR(f.slope, -0.4, 3.0 * f.slope_ci68);
  EXPECT_NEAR(f.intercept, 7.0, 3.0 * f.intercept_ci68);
}

TEST(FitLinear, ConstantAbscissaIsRankDeficient) {
  EXPECT_THROW(st::fit_linear(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
               ss::DegenerateError);
}

TEST(PropagateXiSq, ZeroUncertainty) {
  const auto r = st::propagate_xi_sq_ci({3e-4, 0}, {5e5, 0}, {0.96, 0});
  EXPECT_EQ(r.u, 0.0);
  EXPECT_EQ(r.ci68_low, r.ci68_high);
  EXPECT_NEAR(r.xi_sq, std::pow(3e-4 * std::sqrt(5e5) / 0.96, 2), 1e-15);
}

TEST(PropagateXiSq, SingleInputReducesToIntervalArithmetic) {
  const auto r = st::propagate_xi_sq_ci({3e-4, 6e-6}, {5e5, 0}, {0.96, 0});
  EXPECT_NEAR(r.u / r.xi_sq, 2.0 * 6e-6 / 3e-4, 1e-14);
  const auto rn = st::propagate_xi_sq_ci({3e-4, 0}, {5e5, 1e4}, {0.96, 0});
  EXPECT_NEAR(rn.u / rn.xi_sq, 1e4 / 5e5, 1e-14);
  const auto rc = st::propagate_xi_sq_ci({3e-4, 0}, {5e5, 0}, {0.96, 0.01});
  EXPECT_NEAR(rc.u / rc.xi_sq, 2.0 * 0.01 / 0.96, 1e-14);
}

TEST(PropagateXiSq, AgreesWithMonteCarloPropagation) {
  const st::Measurement dt{3e-4, 0.05 * 3e-4};
  const st::Measurement ne{5e5, 0.05 * 5e5};
  const st::Measurement co{0.96, 0.05 * 0.96};
  const auto first = st::propagate_xi_sq_ci(dt, ne, co);
  ss::RngStream rng(71, 0);
  std::vector<double> draws(100000);
  for (auto& v : draws) {
    const double a = dt.value + dt.u * rng.normal();
    const double b = ne.value + ne.u * rng.normal();
    const double c = co.value + co.u * rng.normal();
    v = a * a * b / (c * c);
  }
  EXPECT_NEAR(st::sample_std(draws) / first.u, 1.0, 0.05);
}

TEST(QuadraticExtremumFit, ExactParabola) {
  std::vector<double> x;
  std::vector<double> y;
  for (int i = -4; i <= 4; ++i) {
    x.push_back(kPi + 0.1 * i);
    y.push_back(1.0 - std::pow(0.1 * i, 2));
  }
  const auto f = st::quadratic_extremum_fit(x, y);
  EXPECT_NEAR(f.value, 1.0, 1e-12);
  EXPECT_NEAR(f.x_extremum, kPi, 1e-12);
  EXPECT_NEAR(f.curvature, -1.0, 1e-10);
  EXPECT_NEAR(f.prediction_halfwidth, 0.0, 1e-10);
}

TEST(QuadraticExtremumFit, CosineTopBias) {
  std::vector<double> x;
  std::vector<double> y;
  for (int i = -4; i <= 4; ++i) {
    x.push_back(kPi + 0.05 * i);
    y.push_back(-std::cos(x.back()));
  }
  EXPECT_NEAR(st::quadratic_extremum_fit(x, y).value, 1.0, 1e-3);
}

TEST(QuadraticExtremumFit, DegenerateInputs) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  EXPECT_THROW(st::quadratic_extremum_fit(x, std::vector<double>(5, 2.0)), ss::DegenerateError);
  EXPECT_THROW(st::quadratic_extremum_fit(x, std::vector<double>{0, 1, 4, 9, 16}),
               ss::DegenerateError);
  EXPECT_THROW(st::quadratic_extremum_fit(std::vector<double>{0, 1, 2},
                                          std::vector<double>{0, 1, 0}),
               ss::InvalidParameter);
}

TEST(Histogram, EmptyInput) {
  const auto h = st::histogram(std::vector<double>{}, 10);
  EXPECT_TRUE(h.counts.empty());
  EXPECT_TRUE(h.edges.empty());
}

TEST(Histogram, ConstantValuesShareOneBin) {
  const auto h = st::histogram(std::vector<double>(17, 0.25), 1);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts[0], 17u);
}

TEST(Histogram, CountsSumToSampleSize) {
  const auto v = gaussian(12345, 72);
  const auto h = st::histogram(v, 30);
  EXPECT_EQ(h.edges.size(), 31u);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), v.size());
  EXPECT_GT(h.counts[15] + h.counts[14], h.counts[0] + h.counts[29]);
}

TEST(VarianceRatioBounds, NormalApproximation) {
  const auto b = st::variance_ratio_bounds(100001, 3.0);
  const double sd = std::sqrt(2.0 / 100000.0);
  EXPECT_NEAR(b.low, 1.0 - 3.0 * sd, 0.05 * 3.0 * sd);
  EXPECT_NEAR(b.high, 1.0 + 3.0 * sd, 0.05 * 3.0 * sd);
}

}  // namespace
