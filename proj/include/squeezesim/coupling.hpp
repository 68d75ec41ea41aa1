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
/// Per-atom fractional couplings to the probe mode and the effective
/// observable statistics derived from them.
///
/// For a coupling vector eta (one entry per atom, each in [0, 1]):
///
///   <eta>_e   = sum(eta) / N,      <eta^2>_e = sum(eta^2) / N
///   N_eff     = N <eta>_e^2 / <eta^2>_e
///   p_eff     = 1 - N_eff / N
///   delta_eff = delta_0 <eta^2>_e / <eta>_e
///
/// N_eff is the atom number of the homogeneous ensemble whose collective
/// measurement statistics match the inhomogeneous one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "squeezesim/constants.hpp"
#include "squeezesim/ensemble.hpp"
#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"

namespace squeezesim {

struct CavityMode {
  double waist_um = 120.0;  // probe 1/e^2 intensity radius
  double probe_wavelength_nm = constants::kProbeWavelengthNm;
  double lattice_wavelength_nm = constants::kLatticeWavelengthNm;
  double delta_k = 0.0;  // rad/um, residual probe/lattice mismatch

  /// A mode that couples every atom with unit strength.
  static CavityMode uniform() {
    CavityMode mode;
    mode.waist_um = std::numeric_limits<double>::infinity();
    return mode;
  }

  [[nodiscard]] double probe_wavenumber() const noexcept {
    return 2.0 * constants::kPi / (probe_wavelength_nm * 1e-3);
  }

  void validate() const {
    detail::require(waist_um > 0.0, "mode waist must be positive");
    detail::require(delta_k >= 0.0, "commensurability mismatch must be >= 0");
    detail::require(probe_wavelength_nm > 0.0 && lattice_wavelength_nm > 0.0,
                    "wavelengths must be positive");
  }
};

/// How atoms sit along the probe standing wave.
enum class LongitudinalRegime {
  kPinned,  // trapped on lattice sites aligned with probe antinodes
  kFree,    // untrapped, uniformly distributed over the standing wave
};

struct CouplingProfile {
  std::vector<double> eta;

  [[nodiscard]] std::size_t size() const noexcept { return eta.size(); }
};

struct CouplingStats {
  std::size_t n = 0;
  double mean_eta = 0.0;
  double mean_eta_sq = 0.0;
  double n_eff = 0.0;
  double p_eff = 0.0;
  double delta_eff = 0.0;  // Hz per spin flip
  double delta_0 = 0.0;    // Hz per spin flip at unit coupling

  /// <eta>_e / <eta^2>_e, the prefactor of the effective observable.
  [[nodiscard]] double weight_scale() const noexcept {
    return mean_eta / mean_eta_sq;
  }
};

namespace detail {

inline double transverse_factor(const Vec3& p, double waist_um) {
  if (std::isinf(waist_um)) return 1.0;
  return std::exp(-2.0 * (p.x * p.x + p.y * p.y) / (waist_um * waist_um));
}

}  // namespace detail

/// eta_i = exp(-2 (x^2 + y^2) / w0^2) * cos^2(dk z) for pinned atoms.
inline CouplingProfile coupling_profile(const AtomCloud& cloud,
                                        const CavityMode& mode,
                                        CouplingProfile storage = {}) {
  mode.validate();
  detail::require(cloud.size() >= 1, "coupling needs a nonempty cloud");
  CouplingProfile profile = std::move(storage);
  profile.eta.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.pos[i];
    double longitudinal = 1.0;
    if (mode.delta_k != 0.0) {
      const double c = std::cos(mode.delta_k * p.z);
      longitudinal = c * c;
    }
    profile.eta[i] = detail::transverse_factor(p, mode.waist_um) * longitudinal;
  }
  return profile;
}

/// Regime-selecting overload. The free regime draws one uniform standing-wave
/// phase per atom from rng: eta_i = T(x, y) * cos^2(k z + phi_i).
inline CouplingProfile coupling_profile(const AtomCloud& cloud,
                                        const CavityMode& mode,
                                        LongitudinalRegime regime,
                                        RngStream& rng, CouplingProfile storage = {}) {
  if (regime == LongitudinalRegime::kPinned) {
    return coupling_profile(cloud, mode, std::move(storage));
  }
  mode.validate();
  detail::require(cloud.size() >= 1, "coupling needs a nonempty cloud");
  const double k = mode.probe_wavenumber();
  CouplingProfile profile = std::move(storage);
  profile.eta.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double phase = 2.0 * constants::kPi * rng.uniform();
    const double c = std::cos(k * cloud.pos[i].z + phase);
    profile.eta[i] = detail::transverse_factor(cloud.pos[i], mode.waist_um) * c * c;
  }
  return profile;
}

inline CouplingStats coupling_stats(const CouplingProfile& profile,
                                    double delta_0 = constants::kShiftPerSpinFlipHz) {
  detail::require(profile.size() >= 1, "coupling profile is empty");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double e : profile.eta) {
    detail::require(e >= 0.0 && e <= 1.0, "coupling must lie in [0, 1]");
    sum += e;
    sum_sq += e * e;
  }
  if (sum_sq == 0.0) throw DegenerateError("all couplings are zero");
  CouplingStats s;
  s.n = profile.size();
  const double n = static_cast<double>(s.n);
  s.mean_eta = sum / n;
  s.mean_eta_sq = sum_sq / n;
  s.n_eff = sum * sum / sum_sq;
  s.p_eff = 1.0 - s.n_eff / n;
  s.delta_0 = delta_0;
  s.delta_eff = delta_0 * s.mean_eta_sq / s.mean_eta;
  return s;
}

/// A profile with the requested effective loss: ceil(n/2) atoms at unit
/// coupling, the rest at a common level b chosen so that p_eff matches.
/// When p_eff exceeds what two levels with b >= 0 can give, some atoms are
/// set to zero coupling instead. The realised p_eff is exact up to rounding.
inline CouplingProfile two_level_profile(std::size_t n, double p_eff) {
  detail::require(n >= 2, "two-level profile needs n >= 2");
  detail::require(p_eff >= 0.0 && p_eff < 1.0, "p_eff must lie in [0, 1)");
  const double target = 1.0 - p_eff;  // N_eff / N
  const std::size_t n_hi = (n + 1) / 2;
  const std::size_t n_lo = n - n_hi;
  const double dn = static_cast<double>(n);
  const auto ratio = [&](double b) {
    const double s1 = static_cast<double>(n_hi) + static_cast<double>(n_lo) * b;
    const double s2 = static_cast<double>(n_hi) + static_cast<double>(n_lo) * b * b;
    return s1 * s1 / (dn * s2);
  };
  CouplingProfile profile;
  profile.eta.assign(n, 1.0);
  if (p_eff == 0.0) return profile;
  if (target >= ratio(0.0)) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (ratio(mid) < target ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    std::fill(profile.eta.begin() + static_cast<std::ptrdiff_t>(n_hi),
              profile.eta.end(), b);
  } else {
    // N_eff = number of unit-coupled atoms.
    const auto keep = static_cast<std::size_t>(std::llround(target * dn));
    detail::require(keep >= 1, "p_eff too close to 1 for this n");
    std::fill(profile.eta.begin() + static_cast<std::ptrdiff_t>(keep),
              profile.eta.end(), 0.0);
  }
  return profile;
}

/// Closed-form ensemble averages of the pinned-regime coupling over a
/// Gaussian cloud (centroid offset allowed).
struct ExpectedCoupling {
  double transverse = 1.0;    // E[exp(-2 (x^2 + y^2) / w^2)]
  double longitudinal = 1.0;  // E[cos^2(dk z)]

  [[nodiscard]] double mean_eta() const noexcept {
    return transverse * longitudinal;
  }
};

inline ExpectedCoupling expected_coupling(const CavityMode& mode,
                                          const PhaseSpaceSummary& cloud) {
  mode.validate();
  ExpectedCoupling out;
  if (!std::isinf(mode.waist_um)) {
    const double w2 = mode.waist_um * mode.waist_um;
    const auto axis = [&](double centre, double rms) {
      const double d = 1.0 + 4.0 * rms * rms / w2;
      return std::exp(-2.0 * centre * centre / (w2 * d)) / std::sqrt(d);
    };
    out.transverse = axis(cloud.centroid_pos.x, cloud.rms_pos.x) *
                     axis(cloud.centroid_pos.y, cloud.rms_pos.y);
  }
  const double phase = mode.delta_k * cloud.centroid_pos.z;
  const double spread = mode.delta_k * cloud.rms_pos.z;
  out.longitudinal =
      0.5 * (1.0 + std::cos(2.0 * phase) * std::exp(-2.0 * spread * spread));
  return out;
}

/// Result of fitting the mode geometry to a target <eta>_e.
struct GeometryCalibration {
  CavityMode mode;
  double target_mean_eta = constants::kReferenceMeanEta;
  double longitudinal_share = 0.0;
  ExpectedCoupling achieved;
};

/// Chooses waist and dk so that the trapped cloud has <eta>_e equal to
/// target. The coupling deficit is split multiplicatively: the longitudinal
/// factor is target^share and the transverse factor target^(1 - share).
/// Throws DegenerateError when no geometry reaches the target.
inline GeometryCalibration calibrate_geometry(const PhaseSpaceSummary& trapped,
                                              double target_mean_eta,
                                              double longitudinal_share,
                                              CavityMode base = CavityMode{}) {
  detail::require(target_mean_eta > 0.0 && target_mean_eta <= 1.0,
                  "target <eta> must lie in (0, 1]");
  detail::require(longitudinal_share >= 0.0 && longitudinal_share <= 1.0,
                  "longitudinal share must lie in [0, 1]");
  GeometryCalibration cal;
  cal.target_mean_eta = target_mean_eta;
  cal.longitudinal_share = longitudinal_share;
  const double want_long = std::pow(target_mean_eta, longitudinal_share);
  const double want_trans = target_mean_eta / want_long;

  base.delta_k = 0.0;
  if (want_long < 1.0) {
    if (trapped.rms_pos.z <= 0.0 || std::abs(trapped.centroid_pos.z) > 0.0) {
      throw DegenerateError("longitudinal calibration needs a centred cloud of nonzero length");
    }
    const double e = 2.0 * want_long - 1.0;
    if (e <= 0.0) {
      throw DegenerateError("longitudinal factor cannot fall to 1/2 or below");
    }
    const double s2 = -0.5 * std::log(e);
    base.delta_k = std::sqrt(s2) / trapped.rms_pos.z;
  }

  if (want_trans >= 1.0) {
    base.waist_um = std::numeric_limits<double>::infinity();
  } else {
    // Transverse factor increases monotonically with the waist.
    const auto factor = [&](double w) {
      CavityMode m = base;
      m.waist_um = w;
      return expected_coupling(m, trapped).transverse;
    };
    double lo = 1e-6;
    double hi = 1.0;
    while (factor(hi) < want_trans) {
      hi *= 2.0;
      if (hi > 1e12) throw DegenerateError("waist calibration did not converge");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (factor(mid) < want_trans ? lo : hi) = mid;
    }
    base.waist_um = 0.5 * (lo + hi);
  }
  cal.mode = base;
  cal.achieved = expected_coupling(base, trapped);
  return cal;
}

}  // namespace squeezesim
