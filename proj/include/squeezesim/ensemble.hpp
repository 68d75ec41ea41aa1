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
/// Thermal atom clouds and their phase-space evolution.
///
/// Coordinates: x and y are transverse to the cavity axis, z runs along it.
/// Trap centre and cavity axis pass through the origin.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "squeezesim/constants.hpp"
#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"

namespace squeezesim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) noexcept {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr Vec3 operator*(double s, Vec3 a) noexcept {
    return {s * a.x, s * a.y, s * a.z};
  }
  friend constexpr bool operator==(Vec3, Vec3) noexcept = default;

  [[nodiscard]] double norm() const noexcept {
    return std::sqrt(x * x + y * y + z * z);
  }
};

/// Per-atom positions (um) and velocities (um/ms).
struct AtomCloud {
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;

  [[nodiscard]] std::size_t size() const noexcept { return pos.size(); }
};

struct TrapConfig {
  double depth_uK = constants::kLatticeDepthMicroK;
  double transverse_omega = 0.0;    // rad/ms
  double longitudinal_omega = 0.0;  // rad/ms
  double lattice_wavelength_nm = constants::kLatticeWavelengthNm;
  double switching_time_us = constants::kLatticeSwitchingUs;

  void validate() const {
    detail::require(depth_uK > 0.0, "trap depth must be positive");
    detail::require(transverse_omega > 0.0 && longitudinal_omega > 0.0,
                    "trap frequencies must be positive");
  }
};

/// Harmonic approximation of a Gaussian-beam dipole trap:
/// omega = sqrt(4 U0 / (m w0^2)), returned in rad/ms.
inline double gaussian_trap_omega(double depth_uK, double beam_waist_um) {
  detail::require(depth_uK > 0.0 && beam_waist_um > 0.0,
                  "trap depth and waist must be positive");
  const double u0_over_m = constants::kBoltzmann * depth_uK * 1e-6 /
                           constants::kRb87Mass *
                           constants::kSiVelocitySqToUmPerMsSq;
  return std::sqrt(4.0 * u0_over_m) / beam_waist_um;
}

/// Default lattice: 520 uK deep, 170 um transverse waist, weak longitudinal
/// envelope confinement.
inline TrapConfig default_trap() {
  TrapConfig trap;
  trap.transverse_omega = gaussian_trap_omega(trap.depth_uK, 170.0);
  trap.longitudinal_omega = 0.0063;
  return trap;
}

struct GravityConfig {
  Vec3 g{0.0, -constants::kGravity, 0.0};  // um/ms^2

  [[nodiscard]] double magnitude() const noexcept { return g.norm(); }

  /// Gravity of the given magnitude along a (not necessarily unit) direction.
  static GravityConfig along(Vec3 direction,
                             double magnitude = constants::kGravity) {
    const double n = direction.norm();
    detail::require(n > 0.0, "gravity direction must be nonzero");
    return GravityConfig{(magnitude / n) * direction};
  }
};

struct PhaseSpaceSummary {
  Vec3 centroid_pos;
  Vec3 centroid_vel;
  Vec3 rms_pos;
  Vec3 rms_vel;
  Vec3 pos_vel_cov;  // per-axis <(x - <x>)(v - <v>)>
};

/// RMS thermal velocity per axis, sqrt(k_B T / m), in um/ms.
inline double thermal_velocity(double temperature_uK) {
  detail::require(temperature_uK > 0.0, "temperature must be positive");
  return std::sqrt(constants::kBoltzmann * temperature_uK * 1e-6 /
                   constants::kRb87Mass * constants::kSiVelocitySqToUmPerMsSq);
}

/// Gaussian cloud centred at the origin with uncorrelated phase space.
/// storage, if given, donates its allocation to the result.
inline AtomCloud sample_thermal_cloud(std::size_t n, double temperature_uK,
                                      double rms_radius_transverse_um,
                                      double rms_radius_longitudinal_um,
                                      RngStream& rng, AtomCloud storage = {}) {
  detail::require(n >= 1, "cloud needs at least one atom");
  detail::require(rms_radius_transverse_um > 0.0 &&
                      rms_radius_longitudinal_um > 0.0,
                  "cloud radii must be positive");
  const double v = thermal_velocity(temperature_uK);
  AtomCloud cloud = std::move(storage);
  cloud.pos.resize(n);
  cloud.vel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.pos[i] = {rms_radius_transverse_um * rng.normal(),
                    rms_radius_transverse_um * rng.normal(),
                    rms_radius_longitudinal_um * rng.normal()};
    cloud.vel[i] = {v * rng.normal(), v * rng.normal(), v * rng.normal()};
  }
  return cloud;
}

/// Ballistic flight under uniform gravity; exact kinematics.
inline AtomCloud free_flight(AtomCloud cloud, double dt_ms,
                             const GravityConfig& gravity) {
  detail::require(dt_ms >= 0.0, "free-flight time must be nonnegative");
  const Vec3 drop = (0.5 * dt_ms * dt_ms) * gravity.g;
  const Vec3 kick = dt_ms * gravity.g;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud.pos[i] = cloud.pos[i] + dt_ms * cloud.vel[i] + drop;
    cloud.vel[i] = cloud.vel[i] + kick;
  }
  return cloud;
}

namespace detail {

struct Rotation {
  double c = 1.0;
  double s = 0.0;
  double omega = 1.0;

  Rotation(double omega_in, double t)
      : c(std::cos(omega_in * t)), s(std::sin(omega_in * t)), omega(omega_in) {}

  void apply(double& x, double& v) const noexcept {
    const double x0 = x;
    x = x0 * c + (v / omega) * s;
    v = -x0 * omega * s + v * c;
  }
};

}  // namespace detail

/// Exact harmonic evolution about the trap centre. Gravity sag inside the
/// trap (g / omega^2, about a micrometre) is neglected.
inline AtomCloud harmonic_evolve(AtomCloud cloud, const TrapConfig& trap,
                                 double dt_ms) {
  trap.validate();
  detail::require(dt_ms >= 0.0, "evolution time must be nonnegative");
  const detail::Rotation transverse(trap.transverse_omega, dt_ms);
  const detail::Rotation longitudinal(trap.longitudinal_omega, dt_ms);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    transverse.apply(cloud.pos[i].x, cloud.vel[i].x);
    transverse.apply(cloud.pos[i].y, cloud.vel[i].y);
    longitudinal.apply(cloud.pos[i].z, cloud.vel[i].z);
  }
  return cloud;
}

/// Adiabatic change of the longitudinal confinement from omega_from to
/// omega_to. The action of every atom is conserved, so longitudinal offsets
/// from the centroid scale by sqrt(omega_from / omega_to) and velocity
/// offsets by the inverse factor.
inline AtomCloud adiabatic_longitudinal_ramp(AtomCloud cloud,
                                             double omega_from,
                                             double omega_to) {
  detail::require(omega_from > 0.0 && omega_to > 0.0,
                  "adiabatic ramp needs positive frequencies");
  if (cloud.size() == 0) return cloud;
  double zc = 0.0;
  double vc = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    zc += cloud.pos[i].z;
    vc += cloud.vel[i].z;
  }
  zc /= static_cast<double>(cloud.size());
  vc /= static_cast<double>(cloud.size());
  const double scale = std::sqrt(omega_from / omega_to);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud.pos[i].z = zc + scale * (cloud.pos[i].z - zc);
    cloud.vel[i].z = vc + (cloud.vel[i].z - vc) / scale;
  }
  return cloud;
}

/// Exact empirical moments (population, 1/n normalisation).
inline PhaseSpaceSummary summarize(const AtomCloud& cloud) {
  detail::require(cloud.size() >= 1, "cannot summarize an empty cloud");
  detail::require(cloud.vel.size() == cloud.pos.size(),
                  "position and velocity arrays differ in length");
  const double n = static_cast<double>(cloud.size());
  PhaseSpaceSummary s;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    s.centroid_pos = s.centroid_pos + cloud.pos[i];
    s.centroid_vel = s.centroid_vel + cloud.vel[i];
  }
  s.centroid_pos = (1.0 / n) * s.centroid_pos;
  s.centroid_vel = (1.0 / n) * s.centroid_vel;
  Vec3 xx;
  Vec3 vv;
  Vec3 xv;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 dx = cloud.pos[i] + (-1.0) * s.centroid_pos;
    const Vec3 dv = cloud.vel[i] + (-1.0) * s.centroid_vel;
    xx = xx + Vec3{dx.x * dx.x, dx.y * dx.y, dx.z * dx.z};
    vv = vv + Vec3{dv.x * dv.x, dv.y * dv.y, dv.z * dv.z};
    xv = xv + Vec3{dx.x * dv.x, dx.y * dv.y, dx.z * dv.z};
  }
  s.rms_pos = {std::sqrt(xx.x / n), std::sqrt(xx.y / n), std::sqrt(xx.z / n)};
  s.rms_vel = {std::sqrt(vv.x / n), std::sqrt(vv.y / n), std::sqrt(vv.z / n)};
  s.pos_vel_cov = (1.0 / n) * xv;
  return s;
}

/// Moments of the thermal cloud produced by sample_thermal_cloud, before any
/// evolution.
inline PhaseSpaceSummary thermal_summary(double temperature_uK,
                                         double rms_radius_transverse_um,
                                         double rms_radius_longitudinal_um) {
  const double v = thermal_velocity(temperature_uK);
  PhaseSpaceSummary s;
  s.rms_pos = {rms_radius_transverse_um, rms_radius_transverse_um,
               rms_radius_longitudinal_um};
  s.rms_vel = {v, v, v};
  return s;
}

/// Gaussian moments after ballistic flight, in closed form.
inline PhaseSpaceSummary flight_summary(PhaseSpaceSummary s, double dt_ms,
                                        const GravityConfig& gravity) {
  detail::require(dt_ms >= 0.0, "free-flight time must be nonnegative");
  const auto axis = [dt_ms](double& xr, double vr, double& cov) {
    const double var = xr * xr + 2.0 * dt_ms * cov + dt_ms * dt_ms * vr * vr;
    cov += dt_ms * vr * vr;
    xr = std::sqrt(var);
  };
  axis(s.rms_pos.x, s.rms_vel.x, s.pos_vel_cov.x);
  axis(s.rms_pos.y, s.rms_vel.y, s.pos_vel_cov.y);
  axis(s.rms_pos.z, s.rms_vel.z, s.pos_vel_cov.z);
  s.centroid_pos =
      s.centroid_pos + dt_ms * s.centroid_vel + (0.5 * dt_ms * dt_ms) * gravity.g;
  s.centroid_vel = s.centroid_vel + dt_ms * gravity.g;
  return s;
}

/// Gaussian moments after harmonic evolution, in closed form.
inline PhaseSpaceSummary harmonic_summary(PhaseSpaceSummary s,
                                          const TrapConfig& trap,
                                          double dt_ms) {
  trap.validate();
  detail::require(dt_ms >= 0.0, "evolution time must be nonnegative");
  const auto axis = [dt_ms](double omega, double& xc, double& vc, double& xr,
                            double& vr, double& cov) {
    const double c = std::cos(omega * dt_ms);
    const double sn = std::sin(omega * dt_ms);
    const double vx = xr * xr;
    const double vv = vr * vr;
    const double x_new = c * c * vx + sn * sn * vv / (omega * omega) +
                         2.0 * c * sn * cov / omega;
    const double v_new = omega * omega * sn * sn * vx + c * c * vv -
                         2.0 * omega * sn * c * cov;
    const double cov_new =
        -omega * sn * c * vx + sn * c * vv / omega + (c * c - sn * sn) * cov;
    xr = std::sqrt(std::max(x_new, 0.0));
    vr = std::sqrt(std::max(v_new, 0.0));
    cov = cov_new;
    const double x0 = xc;
    xc = x0 * c + vc / omega * sn;
    vc = -x0 * omega * sn + vc * c;
  };
  axis(trap.transverse_omega, s.centroid_pos.x, s.centroid_vel.x, s.rms_pos.x,
       s.rms_vel.x, s.pos_vel_cov.x);
  axis(trap.transverse_omega, s.centroid_pos.y, s.centroid_vel.y, s.rms_pos.y,
       s.rms_vel.y, s.pos_vel_cov.y);
  axis(trap.longitudinal_omega, s.centroid_pos.z, s.centroid_vel.z,
       s.rms_pos.z, s.rms_vel.z, s.pos_vel_cov.z);
  return s;
}

namespace detail {

// Transverse mean-square distance from the trap axis under harmonic
// evolution: A + B cos(2 w t) + C sin(2 w t).
struct TransverseBreathing {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

inline TransverseBreathing transverse_breathing(const PhaseSpaceSummary& s,
                                                double omega) {
  TransverseBreathing out;
  const auto axis = [&](double xc, double vc, double xr, double vr,
                        double cov) {
    const double x2 = xc * xc + xr * xr;
    const double v2 = (vc * vc + vr * vr) / (omega * omega);
    const double xv = (xc * vc + cov) / omega;
    out.a += 0.5 * (x2 + v2);
    out.b += 0.5 * (x2 - v2);
    out.c += xv;
  };
  axis(s.centroid_pos.x, s.centroid_vel.x, s.rms_pos.x, s.rms_vel.x,
       s.pos_vel_cov.x);
  axis(s.centroid_pos.y, s.centroid_vel.y, s.rms_pos.y, s.rms_vel.y,
       s.pos_vel_cov.y);
  return out;
}

inline double breathing_extremum_time(const TransverseBreathing& br,
                                      double omega, bool maximum) {
  const double scale = std::abs(br.a) + std::abs(br.b) + std::abs(br.c);
  if (scale == 0.0) return 0.0;
  if (std::hypot(br.b, br.c) <= 1e-14 * scale) return 0.0;
  // A + R cos(2wt - phi) with phi = atan2(C, B); minimum where 2wt = phi + pi.
  double phase = std::atan2(br.c, br.b) + (maximum ? 0.0 : constants::kPi);
  const double two_pi = 2.0 * constants::kPi;
  phase = std::fmod(phase, two_pi);
  if (phase < 0.0) phase += two_pi;
  if (phase >= two_pi) phase = 0.0;
  return phase / (2.0 * omega);
}

}  // namespace detail

/// Earliest hold time t >= 0 in the trap after which the transverse
/// mean-square distance of the atoms from the trap axis is minimal. The
/// centroid offset is included, since the coupling depends on distance from
/// the cavity axis rather than from the cloud centre.
inline double recompression_time(const PhaseSpaceSummary& at_recapture,
                                 const TrapConfig& trap) {
  trap.validate();
  const double omega = trap.transverse_omega;
  return detail::breathing_extremum_time(
      detail::transverse_breathing(at_recapture, omega), omega, false);
}

/// Earliest hold time at which the transverse size is maximal, i.e. the
/// velocity spread is smallest. Used as the delta-kick collimation hold.
inline double collimation_time(const PhaseSpaceSummary& at_recapture,
                               const TrapConfig& trap) {
  trap.validate();
  const double omega = trap.transverse_omega;
  return detail::breathing_extremum_time(
      detail::transverse_breathing(at_recapture, omega), omega, true);
}

}  // namespace squeezesim
