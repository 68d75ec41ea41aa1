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

#pragma once

/// \file
/// Uncertainty machinery: bootstrap, least-squares fits, first-order error
/// propagation, histograms. Confidence intervals are 68% (one standard
/// error) unless stated otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"

namespace squeezesim::stats {

inline constexpr std::size_t kDefaultResamples = 10000;
inline constexpr double kOneSigmaProbability = 0.6826894921370859;

inline double mean(std::span<const double> v) {
  detail::require(!v.empty(), "mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased (n - 1) sample variance.
inline double sample_variance(std::span<const double> v) {
  detail::require(v.size() >= 2, "variance needs at least two samples");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double sample_std(std::span<const double> v) {
  return std::sqrt(sample_variance(v));
}

/// Two-sided quantile of Student's t covering the central 68.27%.
inline double t_one_sigma(double dof) {
  if (!(dof > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.5 + 0.5 * kOneSigmaProbability);
}

struct BootstrapResult {
  double point_estimate = 0.0;
  double std_error = 0.0;
  double ci68_low = 0.0;
  double ci68_high = 0.0;
  std::size_t n_resamples = 0;
};

/// Bootstrap uncertainty of the sample standard deviation: resample with
/// replacement n_resamples times and take the standard deviation of the
/// resampled standard deviations. The interval is point +/- that value.
inline BootstrapResult bootstrap_std(std::span<const double> samples,
                                     RngStream& rng,
                                     std::size_t n_resamples = kDefaultResamples) {
  detail::require(samples.size() >= 10, "bootstrap needs at least 10 samples");
  detail::require(n_resamples >= 2, "bootstrap needs at least 2 resamples");
  const auto n = static_cast<std::uint32_t>(samples.size());
  std::vector<double> stds(n_resamples);
  std::vector<double> draw(n);
  for (auto& out : stds) {
    for (auto& d : draw) d = samples[rng.below(n)];
    out = sample_std(draw);
  }
  BootstrapResult r;
  r.point_estimate = sample_std(samples);
  r.std_error = sample_std(stds);
  r.ci68_low = r.point_estimate - r.std_error;
  r.ci68_high = r.point_estimate + r.std_error;
  r.n_resamples = n_resamples;
  return r;
}

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci68 = 0.0;      // half-width
  double intercept_ci68 = 0.0;  // half-width; 0 for constrained fits
  double residual_variance = 0.0;
  std::size_t n = 0;
};

/// Least squares y = slope * x.
inline FitResult fit_zero_intercept(std::span<const double> x,
                                    std::span<const double> y) {
  detail::require(x.size() == y.size(), "fit inputs differ in length");
  detail::require(x.size() >= 2, "fit needs at least two points");
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0) throw DegenerateError("all abscissae are zero");
  FitResult f;
  f.n = x.size();
  f.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(x.size() - 1);
  f.residual_variance = rss / dof;
  f.slope_ci68 = t_one_sigma(dof) * std::sqrt(f.residual_variance / sxx);
  return f;
}

/// Ordinary least squares y = intercept + slope * x.
inline FitResult fit_linear(std::span<const double> x,
                            std::span<const double> y) {
  detail::require(x.size() == y.size(), "fit inputs differ in length");
  detail::require(x.size() >= 2, "fit needs at least two points");
  const double xm = mean(x);
  const double ym = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx == 0.0) throw DegenerateError("rank-deficient design: constant x");
  FitResult f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  if (x.size() == 2) {
    f.slope_ci68 = f.intercept_ci68 = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(x.size() - 2);
  f.residual_variance = rss / dof;
  const double t = t_one_sigma(dof);
  const double n = static_cast<double>(x.size());
  f.slope_ci68 = t * std::sqrt(f.residual_variance / sxx);
  f.intercept_ci68 =
      t * std::sqrt(f.residual_variance * (1.0 / n + xm * xm / sxx));
  return f;
}

struct Measurement {
  double value = 0.0;
  double u = 0.0;  // 68% uncertainty
};

struct XiSqInterval {
  double xi_sq = 0.0;
  double u = 0.0;
  double ci68_low = 0.0;
  double ci68_high = 0.0;
};

/// First-order propagation through xi^2 = (dtheta sqrt(N_eff) / C)^2 with
/// independent inputs:
///   (u/xi^2)^2 = (2 u_dtheta/dtheta)^2 + (u_N/N)^2 + (2 u_C/C)^2
inline XiSqInterval propagate_xi_sq_ci(Measurement delta_theta, Measurement n_eff,
                                       Measurement coherence) {
  detail::require(delta_theta.value > 0.0 && n_eff.value > 0.0 &&
                      coherence.value > 0.0,
                  "xi^2 propagation needs positive central values");
  XiSqInterval out;
  const double c = delta_theta.value * std::sqrt(n_eff.value) / coherence.value;
  out.xi_sq = c * c;
  const double rel_theta = 2.0 * delta_theta.u / delta_theta.value;
  const double rel_n = n_eff.u / n_eff.value;
  const double rel_c = 2.0 * coherence.u / coherence.value;
  out.u = out.xi_sq * std::sqrt(rel_theta * rel_theta + rel_n * rel_n + rel_c * rel_c);
  out.ci68_low = out.xi_sq - out.u;
  out.ci68_high = out.xi_sq + out.u;
  return out;
}

struct ExtremumFit {
  double x_extremum = 0.0;
  double value = 0.0;
  double prediction_halfwidth = 0.0;  // 68% prediction interval
  double curvature = 0.0;             // coefficient of (x - x0)^2
};

/// Least-squares parabola through (x, y); returns its vertex and the 68%
/// prediction interval of a new observation there.
inline ExtremumFit quadratic_extremum_fit(std::span<const double> x,
                                          std::span<const double> y) {
  detail::require(x.size() == y.size(), "fit inputs differ in length");
  detail::require(x.size() >= 4, "quadratic fit needs at least four points");
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double x0 = mean(x);
  const double half_range = 0.5 * (*xmax_it - *xmin_it);
  if (half_range == 0.0) throw DegenerateError("quadratic fit with constant x");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (x[static_cast<std::size_t>(i)] - x0) / half_range;
    design(i, 0) = 1.0;
    design(i, 1) = u;
    design(i, 2) = u * u;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw DegenerateError("quadratic fit is rank deficient");
  const Eigen::Vector3d coef = qr.solve(rhs);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (std::abs(coef(2)) <= 1e-12 * std::max(1.0, scale)) {
    throw DegenerateError("quadratic fit has no curvature");
  }
  const double u_star = -coef(1) / (2.0 * coef(2));
  ExtremumFit out;
  out.x_extremum = x0 + u_star * half_range;
  if (out.x_extremum < *xmin_it || out.x_extremum > *xmax_it) {
    throw DegenerateError("fitted extremum lies outside the sampled range");
  }
  out.value = coef(0) + coef(1) * u_star + coef(2) * u_star * u_star;
  out.curvature = coef(2) / (half_range * half_range);
  const Eigen::VectorXd resid = rhs - design * coef;
  const double dof = static_cast<double>(x.size() - 3);
  const double s2 = resid.squaredNorm() / dof;
  const Eigen::Matrix3d gram_inv =
      (design.transpose() * design).inverse();
  const Eigen::Vector3d at(1.0, u_star, u_star * u_star);
  const double leverage = at.dot(gram_inv * at);
  out.prediction_halfwidth = t_one_sigma(dof) * std::sqrt(s2 * (1.0 + leverage));
  return out;
}

struct Histogram {
  std::vector<double> edges;  // n_bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Equal-width bins spanning [min, max]; the maximum lands in the last bin.
/// A sample with zero spread is binned over [v - 1/2, v + 1/2].
inline Histogram histogram(std::span<const double> values, std::size_t n_bins) {
  detail::require(n_bins >= 1, "histogram needs at least one bin");
  Histogram h;
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  h.edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges.back() = hi;
  h.counts.assign(n_bins, 0);
  for (double v : values) {
    auto bin = static_cast<std::size_t>((v - lo) / width);
    if (bin >= n_bins) bin = n_bins - 1;
    ++h.counts[bin];
  }
  return h;
}

struct Bounds {
  double low = 0.0;
  double high = 0.0;
};

/// Acceptance region for s^2 / sigma^2 of an n-sample Gaussian variance
/// estimate, at the chi-square quantiles matching +/- k standard normal
/// deviations.
inline Bounds variance_ratio_bounds(std::size_t n, double k_sigma) {
  detail::require(n >= 2, "variance bounds need at least two samples");
  detail::require(k_sigma > 0.0, "bound width must be positive");
  const double dof = static_cast<double>(n - 1);
  const boost::math::normal unit;
  const double tail = boost::math::cdf(unit, -k_sigma);
  const boost::math::chi_squared chi(dof);
  return {boost::math::quantile(chi, tail) / dof,
          boost::math::quantile(boost::math::complement(chi, tail)) / dof};
}

}  // namespace squeezesim::stats
