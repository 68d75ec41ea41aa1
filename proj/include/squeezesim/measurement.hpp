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
/// QND probe model and the estimators built on it.
///
/// A probe reports the quadrature X' = D J + X, where D is the calibrated
/// discriminator and X the probe's own noise. Angles are inferred against
/// the Bloch-sphere radius the probe sees: theta = 2 X' / (D * scale), with
/// scale = N for the homogeneous preparation probe and N_eff for the
/// readout probe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "squeezesim/constants.hpp"
#include "squeezesim/coupling.hpp"
#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"
#include "squeezesim/stats.hpp"

namespace squeezesim {

enum class ProbeRole { kPreparation, kReadout };

struct ProbeConfig {
  double discriminator = 1.0;        // quadrature units per spin flip
  double quadrature_noise_var = 0.0;  // var(X), quadrature units^2
  double spin_flip_noise_var = 0.0;   // additive angle variance, rad^2
  double strength_label = 1.0;        // AC-Stark phase in units of pi

  void validate() const {
    detail::require(discriminator > 0.0, "discriminator must be positive");
    detail::require(quadrature_noise_var >= 0.0 && spin_flip_noise_var >= 0.0,
                    "probe noise variances must be nonnegative");
  }

  /// Angle variance this probe adds when inferring against scale_atoms.
  [[nodiscard]] double angle_noise_var(double scale_atoms) const {
    return 4.0 * quadrature_noise_var /
               (discriminator * discriminator * scale_atoms * scale_atoms) +
           spin_flip_noise_var;
  }

  /// Probe whose whole resolution is an additive angle variance.
  static ProbeConfig from_angle_variance(double angle_var, double strength = 1.0) {
    ProbeConfig p;
    p.spin_flip_noise_var = angle_var;
    p.strength_label = strength;
    return p;
  }
};

struct ProbeRecord {
  double x_prime = 0.0;
  double inferred_jz = 0.0;
  double inferred_theta = 0.0;
  double scale_atoms = 0.0;
};

struct AngleEstimate {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double diff = 0.0;  // theta2 - theta1
};

struct SqueezingReport {
  double delta_theta = 0.0;
  double n_eff = 0.0;
  double coherence = 0.0;
  double xi_sq = 0.0;
  double xi_db = 0.0;
  double xi_sq_ci68_low = 0.0;
  double xi_sq_ci68_high = 0.0;
};

/// theta = 2 X' / (D * scale_atoms).
inline double infer_theta(const ProbeRecord& record, double discriminator,
                          double scale_atoms) {
  detail::require(scale_atoms > 0.0, "angle scale must be positive");
  return 2.0 * record.x_prime / (discriminator * scale_atoms);
}

/// Simulates one probe of a collective spin value. The spin-flip term is an
/// angle variance; it is folded into X' as the equivalent quadrature noise
/// so that the recorded angle is always 2 X' / (D * scale).
inline ProbeRecord probe_quadrature(double jz_value, const ProbeConfig& probe,
                                    double scale_atoms, RngStream& rng) {
  probe.validate();
  detail::require(scale_atoms > 0.0, "angle scale must be positive");
  ProbeRecord r;
  r.scale_atoms = scale_atoms;
  r.x_prime = probe.discriminator * jz_value;
  if (probe.quadrature_noise_var > 0.0) {
    r.x_prime += std::sqrt(probe.quadrature_noise_var) * rng.normal();
  }
  if (probe.spin_flip_noise_var > 0.0) {
    r.x_prime += probe.discriminator * 0.5 * scale_atoms *
                 std::sqrt(probe.spin_flip_noise_var) * rng.normal();
  }
  r.inferred_jz = r.x_prime / probe.discriminator;
  r.inferred_theta = infer_theta(r, probe.discriminator, scale_atoms);
  return r;
}

/// Cavity resonance shift delta_eff * J_z,eff, in Hz.
inline double cavity_shift(double jz_eff, const CouplingStats& stats) {
  return stats.delta_eff * jz_eff;
}

/// Shift magnitude with every atom in one state: delta_eff N_eff / 2.
inline double max_cavity_shift(const CouplingStats& stats) {
  return stats.delta_eff * stats.n_eff / 2.0;
}

/// Scattering-induced linewidth broadening rescaled by <eta>_e.
inline double broadened_linewidth(double kappa_s_hz, const CouplingStats& stats) {
  detail::require(kappa_s_hz > 0.0, "broadening factor must be positive");
  return stats.mean_eta * kappa_s_hz;
}

/// (dtheta)^2 = p / (N (1 - p)) + sigma1^2 + sigma2^2.
inline double delta_theta_analytic(double n, double p_eff, double sigma1,
                                   double sigma2) {
  detail::require(n > 0.0, "atom number must be positive");
  detail::require(p_eff >= 0.0 && p_eff < 1.0, "p_eff must lie in [0, 1)");
  return p_eff / (n * (1.0 - p_eff)) + sigma1 * sigma1 + sigma2 * sigma2;
}

struct EffectiveNumberEstimate {
  double n_eff = 0.0;
  double p_eff = 0.0;
};

/// N_eff from coherent-state fluctuations: |J_eff|^2 / var(J_z,eff), with
/// |J_eff| = max_shift / delta_eff. Known probe noise (in spin units^2,
/// var(X)/D^2) is removed from the variance first.
inline EffectiveNumberEstimate estimate_p_eff_css(
    std::span<const double> jz_eff_samples, double max_shift_hz,
    double delta_eff_hz, std::size_t n_total, double probe_noise_var = 0.0) {
  detail::require(jz_eff_samples.size() >= 100,
                  "N_eff estimate needs at least 100 samples");
  detail::require(max_shift_hz > 0.0 && delta_eff_hz > 0.0,
                  "shift calibration must be positive");
  detail::require(n_total >= 1, "total atom number must be positive");
  detail::require(probe_noise_var >= 0.0, "probe noise must be nonnegative");
  const double var = stats::sample_variance(jz_eff_samples) - probe_noise_var;
  if (!(var > 0.0)) throw DegenerateError("spin variance is not positive");
  const double j_max = max_shift_hz / delta_eff_hz;
  EffectiveNumberEstimate e;
  e.n_eff = j_max * j_max / var;
  e.p_eff = 1.0 - e.n_eff / static_cast<double>(n_total);
  return e;
}

/// Maximum-shift measurements for one free-fall time.
struct CalibrationSeries {
  double dt_ms = 0.0;
  std::vector<double> atom_counts;
  std::vector<double> max_shifts_hz;
};

struct MeanEtaCalibration {
  double dt_ms = 0.0;
  stats::FitResult fit;
  double mean_eta = 0.0;
  double mean_eta_ci68 = 0.0;
};

/// Fits max shift against atom number for each series; the slopes are
/// proportional to <eta>_e and are normalised by the first (reference)
/// series, whose <eta>_e is known.
inline std::vector<MeanEtaCalibration> calibrate_mean_eta(
    std::span<const CalibrationSeries> series,
    double reference_mean_eta = constants::kReferenceMeanEta) {
  detail::require(!series.empty(), "calibration needs at least one series");
  std::vector<MeanEtaCalibration> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    detail::require(s.atom_counts.size() == s.max_shifts_hz.size(),
                    "calibration counts and shifts differ in length");
    detail::require(s.atom_counts.size() >= 3,
                    "calibration needs at least three points per series");
    for (double c : s.atom_counts) {
      detail::require(c > 0.0, "atom counts must be positive");
    }
    MeanEtaCalibration c;
    c.dt_ms = s.dt_ms;
    c.fit = stats::fit_linear(s.atom_counts, s.max_shifts_hz);
    out.push_back(c);
  }
  const double ref_slope = out.front().fit.slope;
  if (ref_slope == 0.0) throw DegenerateError("reference slope is zero");
  const double ref_rel = out.front().fit.slope_ci68 / ref_slope;
  for (auto& c : out) {
    c.mean_eta = c.fit.slope / ref_slope * reference_mean_eta;
    const double rel = c.fit.slope_ci68 / c.fit.slope;
    c.mean_eta_ci68 = std::abs(c.mean_eta) *
                      (&c == &out.front() ? 0.0 : std::hypot(rel, ref_rel));
  }
  return out;
}

/// xi^2 = (dtheta sqrt(N_eff) / C)^2.
inline SqueezingReport wineland(double delta_theta, double n_eff,
                                double coherence) {
  detail::require(n_eff >= 1.0, "N_eff must be at least 1");
  detail::require(coherence > 0.0 && coherence <= 1.0,
                  "coherence must lie in (0, 1]");
  detail::require(delta_theta >= 0.0, "angle resolution must be nonnegative");
  SqueezingReport r;
  r.delta_theta = delta_theta;
  r.n_eff = n_eff;
  r.coherence = coherence;
  const double a = delta_theta * std::sqrt(n_eff) / coherence;
  r.xi_sq = a * a;
  r.xi_db = 10.0 * std::log10(r.xi_sq);
  r.xi_sq_ci68_low = r.xi_sq_ci68_high = r.xi_sq;
  return r;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct RamseyResult {
  double coherence = 0.0;
  double ci68 = 0.0;  // half-width
  double phase_at_extremum = 0.0;
  std::vector<double> phases;
  std::vector<double> populations;
};

/// Scans the second Ramsey pulse phase across the fringe maximum at phi = pi,
/// where the population is (1 - C cos phi) / 2, adds Gaussian noise of the
/// given absolute size per point, fits a parabola and reads C off the vertex.
inline RamseyResult ramsey_coherence(double true_contrast,
                                     std::span<const double> phase_grid,
                                     double noise_per_point, RngStream& rng) {
  detail::require(true_contrast >= 0.0 && true_contrast <= 1.0,
                  "contrast must lie in [0, 1]");
  detail::require(phase_grid.size() >= 5, "Ramsey scan needs at least 5 points");
  detail::require(noise_per_point >= 0.0, "noise must be nonnegative");
  const auto [lo, hi] = std::minmax_element(phase_grid.begin(), phase_grid.end());
  if (constants::kPi < *lo || constants::kPi > *hi) {
    throw DegenerateError("fringe extremum lies outside the phase scan");
  }
  RamseyResult r;
  r.phases.assign(phase_grid.begin(), phase_grid.end());
  r.populations.reserve(phase_grid.size());
  for (double phi : phase_grid) {
    double p = 0.5 * (1.0 - true_contrast * std::cos(phi));
    if (noise_per_point > 0.0) p += noise_per_point * rng.normal();
    r.populations.push_back(p);
  }
  const stats::ExtremumFit fit =
      stats::quadratic_extremum_fit(r.phases, r.populations);
  r.coherence = 2.0 * fit.value - 1.0;
  r.ci68 = 2.0 * fit.prediction_halfwidth;
  r.phase_at_extremum = fit.x_extremum;
  return r;
}

/// Evenly spaced phases centred on pi.
inline std::vector<double> ramsey_grid(std::size_t points, double half_width) {
  detail::require(points >= 2, "grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = constants::kPi - half_width +
           2.0 * half_width * static_cast<double>(i) /
               static_cast<double>(points - 1);
  }
  return g;
}

}  // namespace squeezesim
