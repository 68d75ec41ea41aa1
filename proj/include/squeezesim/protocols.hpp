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
/// Timed experiment sequences and the Monte Carlo runner.
///
/// A trial samples a cloud and a spin configuration, then walks the step
/// list: lattice segments move the atoms, probes read out J_z (preparation,
/// homogeneous, scale N) or J_z,eff (readout, coupling of the recaptured
/// cloud, scale N_eff). Spins are frozen between probes apart from explicit
/// microwave rotations, so the change of coupling is the only thing that
/// separates the two readings.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "squeezesim/coupling.hpp"
#include "squeezesim/ensemble.hpp"
#include "squeezesim/errors.hpp"
#include "squeezesim/format.hpp"
#include "squeezesim/measurement.hpp"
#include "squeezesim/random.hpp"
#include "squeezesim/spinmodel.hpp"
#include "squeezesim/stats.hpp"

namespace squeezesim {

enum class StepKind {
  kMwPiHalf,
  kMwSmallRotation,
  kPresqueeze,
  kProbe,
  kLatticeOff,
  kLatticeOn,
  kMwPiHalfCoherence,
};

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::kMwPiHalf: return "mw_pi_half";
    case StepKind::kMwSmallRotation: return "mw_small_rotation";
    case StepKind::kPresqueeze: return "presqueeze";
    case StepKind::kProbe: return "probe";
    case StepKind::kLatticeOff: return "lattice_off";
    case StepKind::kLatticeOn: return "lattice_on";
    case StepKind::kMwPiHalfCoherence: return "mw_pi_half_coherence";
  }
  return "unknown";
}

struct SequenceStep {
  StepKind kind = StepKind::kMwPiHalf;
  double duration_ms = 0.0;
  double value = 0.0;  // rotation angle (rad) or presqueezing xi^2
  ProbeRole role = ProbeRole::kPreparation;
  ProbeConfig probe;

  static SequenceStep make(StepKind kind, double duration_ms = 0.0,
                           double value = 0.0) {
    SequenceStep s;
    s.kind = kind;
    s.duration_ms = duration_ms;
    s.value = value;
    return s;
  }

  static SequenceStep probe_step(ProbeRole role, const ProbeConfig& probe) {
    SequenceStep s;
    s.kind = StepKind::kProbe;
    s.role = role;
    s.probe = probe;
    return s;
  }
};

enum class ProtocolKind { kReleaseRecapture, kDeltaKick };

struct Protocol {
  ProtocolKind kind = ProtocolKind::kReleaseRecapture;
  std::string label;
  std::vector<SequenceStep> steps;
  double free_fall_ms = 0.0;
  double reshape_ms = 0.0;  // delta-kick only
  double epsilon = 0.0;

  /// Lattice on/off segments in the sequence.
  [[nodiscard]] int lattice_segments() const {
    return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const auto& s) {
      return s.kind == StepKind::kLatticeOff || s.kind == StepKind::kLatticeOn;
    }));
  }
};

struct HoldPolicy {
  enum class Kind { kRecompress, kFixed };
  Kind kind = Kind::kRecompress;
  double fixed_ms = 0.0;

  static HoldPolicy recompress() { return {}; }
  static HoldPolicy fixed(double ms) {
    detail::require(ms >= 0.0, "hold time must be nonnegative");
    return {Kind::kFixed, ms};
  }
};

struct ProbePair {
  ProbeConfig preparation;
  ProbeConfig readout;
};

/// Everything a trial needs besides the step list.
struct PhysicsConfig {
  std::size_t atoms = 500000;
  double temperature_uK = 25.0;
  double rms_radius_transverse_um = 17.0;
  double rms_radius_longitudinal_um = 150.0;
  TrapConfig trap = default_trap();
  GravityConfig gravity;
  CavityMode mode;
  LongitudinalRegime readout_regime = LongitudinalRegime::kPinned;
  double delta_0 = constants::kShiftPerSpinFlipHz;
  double tilt = 0.0;
  double xi_sq_in = 1.0;
  double coherence = 0.96;
  SpinMode spin_mode = SpinMode::kSurrogate;
  /// Multiplicative contrast loss per lattice segment beyond the two of the
  /// release-recapture sequence.
  double extra_segment_contrast = 1.0;
  /// When set, the cloud is not simulated: the preparation probe is
  /// homogeneous and the readout probe uses this profile.
  std::optional<CouplingProfile> injected_readout;

  void validate() const {
    detail::require(atoms >= 2, "need at least two atoms");
    detail::require(coherence > 0.0 && coherence <= 1.0,
                    "coherence must lie in (0, 1]");
    detail::require(extra_segment_contrast > 0.0 && extra_segment_contrast <= 1.0,
                    "contrast penalty must lie in (0, 1]");
    if (injected_readout) {
      detail::require(injected_readout->size() == atoms,
                      "injected profile length must equal the atom number");
    } else {
      trap.validate();
      mode.validate();
    }
  }

  [[nodiscard]] PhaseSpaceSummary trapped_summary() const {
    return thermal_summary(temperature_uK, rms_radius_transverse_um,
                           rms_radius_longitudinal_um);
  }
};

/// Contrast after the sequence's extra lattice segments.
inline double protocol_coherence(const Protocol& protocol,
                                 const PhysicsConfig& physics) {
  const int extra = std::max(0, protocol.lattice_segments() - 2);
  return physics.coherence * std::pow(physics.extra_segment_contrast, extra);
}

namespace detail {

inline std::vector<SequenceStep> measurement_steps(double dt, double epsilon,
                                                   const ProbePair& probes,
                                                   double hold_ms,
                                                   double xi_sq_in) {
  std::vector<SequenceStep> steps;
  steps.push_back(SequenceStep::make(StepKind::kMwPiHalf));
  steps.push_back(SequenceStep::make(StepKind::kPresqueeze, 0.0, xi_sq_in));
  steps.push_back(SequenceStep::probe_step(ProbeRole::kPreparation, probes.preparation));
  steps.push_back(SequenceStep::make(StepKind::kMwSmallRotation, 0.0, epsilon));
  if (dt > 0.0) {
    steps.push_back(SequenceStep::make(StepKind::kLatticeOff, dt));
    steps.push_back(SequenceStep::make(StepKind::kLatticeOn, hold_ms));
  }
  steps.push_back(SequenceStep::probe_step(ProbeRole::kReadout, probes.readout));
  return steps;
}

inline double resolve_hold(const HoldPolicy& hold,
                           const PhaseSpaceSummary& at_recapture,
                           const TrapConfig& trap) {
  if (hold.kind == HoldPolicy::Kind::kFixed) return hold.fixed_ms;
  return recompression_time(at_recapture, trap);
}

}  // namespace detail

/// [pi/2, presqueeze, preparation probe, eps, lattice_off(dt),
///  lattice_on(hold), readout probe]. With dt = 0 the lattice is never
/// switched and the probes run back to back.
inline Protocol release_recapture_protocol(double dt_ms, double epsilon,
                                           const ProbePair& probes,
                                           const HoldPolicy& hold,
                                           const PhysicsConfig& physics) {
  detail::require(dt_ms >= 0.0, "free-fall time must be nonnegative");
  detail::require(std::abs(epsilon) <= kMaxSmallAngle,
                  "rotation outside the small-angle range");
  probes.preparation.validate();
  probes.readout.validate();
  double hold_ms = 0.0;
  if (dt_ms > 0.0) {
    const auto at_recapture =
        flight_summary(physics.trapped_summary(), dt_ms, physics.gravity);
    hold_ms = detail::resolve_hold(hold, at_recapture, physics.trap);
  }
  Protocol p;
  p.kind = ProtocolKind::kReleaseRecapture;
  p.label = "release_recapture dt=" + format_double(dt_ms);
  p.free_fall_ms = dt_ms;
  p.epsilon = epsilon;
  p.steps = detail::measurement_steps(dt_ms, epsilon, probes, hold_ms,
                                      physics.xi_sq_in);
  return p;
}

/// One row of the delta-kick timing table: reshaping flight dt' and
/// measurement free fall dt, both in ms.
struct DeltaKickTiming {
  double dt_prime_ms = 0.0;
  double dt_ms = 0.0;
};

inline const std::array<DeltaKickTiming, 10>& delta_kick_table() {
  static const std::array<DeltaKickTiming, 10> rows{{
      {0.8, 0.4}, {0.7, 0.7}, {0.6, 1.2}, {0.5, 1.4}, {0.5, 2.0},
      {0.5, 3.0}, {0.5, 4.0}, {0.5, 5.0}, {0.5, 6.0}, {0.5, 7.0},
  }};
  return rows;
}

/// Reshaping segment [lattice_off(dt'), lattice_on(kick)] followed by the
/// release-recapture measurement sequence. The kick hold defaults to the
/// time at which the re-trapped cloud is largest (velocity spread
/// smallest). With dt' = 0 this is exactly the release-recapture sequence.
inline Protocol delta_kick_protocol(double dt_prime_ms, double dt_ms,
                                    double epsilon, const ProbePair& probes,
                                    const HoldPolicy& hold,
                                    const PhysicsConfig& physics,
                                    std::optional<double> kick_hold_ms = std::nullopt) {
  detail::require(dt_prime_ms >= 0.0 && dt_ms >= 0.0,
                  "delta-kick durations must be nonnegative");
  if (kick_hold_ms) {
    detail::require(*kick_hold_ms >= 0.0, "kick hold must be nonnegative");
  }
  if (dt_prime_ms == 0.0) {
    Protocol p = release_recapture_protocol(dt_ms, epsilon, probes, hold, physics);
    p.kind = ProtocolKind::kDeltaKick;
    p.label = "delta_kick dt_prime=0 dt=" + format_double(dt_ms);
    return p;
  }
  detail::require(std::abs(epsilon) <= kMaxSmallAngle,
                  "rotation outside the small-angle range");
  PhaseSpaceSummary s =
      flight_summary(physics.trapped_summary(), dt_prime_ms, physics.gravity);
  const double kick =
      kick_hold_ms ? *kick_hold_ms : collimation_time(s, physics.trap);
  s = harmonic_summary(s, physics.trap, kick);
  double hold_ms = 0.0;
  if (dt_ms > 0.0) {
    hold_ms = detail::resolve_hold(hold, flight_summary(s, dt_ms, physics.gravity),
                                   physics.trap);
  }
  Protocol p;
  p.kind = ProtocolKind::kDeltaKick;
  p.label = "delta_kick dt_prime=" + format_double(dt_prime_ms) +
            " dt=" + format_double(dt_ms);
  p.free_fall_ms = dt_ms;
  p.reshape_ms = dt_prime_ms;
  p.epsilon = epsilon;
  p.steps.push_back(SequenceStep::make(StepKind::kLatticeOff, dt_prime_ms));
  p.steps.push_back(SequenceStep::make(StepKind::kLatticeOn, kick));
  auto rest = detail::measurement_steps(dt_ms, epsilon, probes, hold_ms,
                                        physics.xi_sq_in);
  p.steps.insert(p.steps.end(), rest.begin(), rest.end());
  return p;
}

/// Line-oriented text form; numbers use the shortest round-trip decimal.
inline std::string serialize(const Protocol& p) {
  std::ostringstream os;
  os << "protocol "
     << (p.kind == ProtocolKind::kDeltaKick ? "delta_kick" : "release_recapture")
     << '\n';
  os << "label " << p.label << '\n';
  if (p.kind == ProtocolKind::kDeltaKick) {
    os << "reshape_ms " << format_double(p.reshape_ms) << '\n';
  }
  os << "free_fall_ms " << format_double(p.free_fall_ms) << '\n';
  for (const auto& s : p.steps) {
    os << "step " << to_string(s.kind);
    switch (s.kind) {
      case StepKind::kLatticeOff:
      case StepKind::kLatticeOn:
        os << ' ' << format_double(s.duration_ms);
        break;
      case StepKind::kMwSmallRotation:
        os << " eps=" << format_double(s.value);
        break;
      case StepKind::kPresqueeze:
        os << " xi_sq=" << format_double(s.value);
        break;
      case StepKind::kProbe:
        os << " role=" << (s.role == ProbeRole::kPreparation ? "preparation" : "readout")
           << " strength=" << format_double(s.probe.strength_label)
           << " D=" << format_double(s.probe.discriminator)
           << " var_x=" << format_double(s.probe.quadrature_noise_var)
           << " var_flip=" << format_double(s.probe.spin_flip_noise_var);
        break;
      default:
        break;
    }
    os << '\n';
  }
  return os.str();
}

struct TrialResult {
  std::uint64_t trial = 0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double epsilon = 0.0;
  double jz = 0.0;      // true J_z at the preparation probe
  double jz_eff = 0.0;  // true J_z,eff at the readout probe
  double inferred_jz1 = 0.0;
  double inferred_jz2 = 0.0;
  CouplingStats prep;
  CouplingStats readout;
  double shift_prep_hz = 0.0;
  double shift_readout_hz = 0.0;

  /// theta_0 = theta_1 + eps, the angle prepared before the release.
  [[nodiscard]] double theta0() const noexcept { return theta1 + epsilon; }
  [[nodiscard]] double diff() const noexcept { return theta2 - theta0(); }
};

namespace detail {

inline CouplingStats homogeneous_stats(std::size_t n, double delta_0) {
  CouplingStats s;
  s.n = n;
  s.mean_eta = 1.0;
  s.mean_eta_sq = 1.0;
  s.n_eff = static_cast<double>(n);
  s.p_eff = 0.0;
  s.delta_0 = delta_0;
  s.delta_eff = delta_0;
  return s;
}

struct TrialScratch {
  AtomCloud cloud;
  SpinSample spins;
  CouplingProfile profile;
};

}  // namespace detail

/// Runs one trial on the substreams addressed by (master_seed, trial).
inline TrialResult run_trial(const Protocol& protocol,
                             const PhysicsConfig& physics,
                             std::uint64_t master_seed, std::uint64_t trial) {
  const RngStream base(master_seed, trial);
  RngStream cloud_rng = base.with_purpose(RngStream::kCloud);
  RngStream spin_rng = base.with_purpose(RngStream::kSpins);
  RngStream probe1_rng = base.with_purpose(RngStream::kProbe1);
  RngStream probe2_rng = base.with_purpose(RngStream::kProbe2);
  RngStream phase_rng = base.with_purpose(RngStream::kPhases);

  // Large per-atom arrays are recycled between trials on the same thread.
  thread_local detail::TrialScratch scratch;
  const bool geometric = !physics.injected_readout.has_value();
  const double n = static_cast<double>(physics.atoms);
  AtomCloud cloud;
  if (geometric) {
    cloud = sample_thermal_cloud(physics.atoms, physics.temperature_uK,
                                 physics.rms_radius_transverse_um,
                                 physics.rms_radius_longitudinal_um, cloud_rng,
                                 std::move(scratch.cloud));
  }
  CollectiveSpinState state{physics.atoms, physics.tilt, 1.0, physics.coherence};
  std::optional<SpinSample> spins;
  const auto ensure_spins = [&] {
    if (spins) return;
    if (physics.spin_mode == SpinMode::kExact) {
      detail::require(state.xi_sq_in == 1.0,
                      "exact binary spins only represent coherent states");
      spins = sample_css(state.n, state.tilt_theta, spin_rng, std::move(scratch.spins));
    } else {
      spins = sample_squeezed(state, spin_rng, std::move(scratch.spins));
    }
  };

  TrialResult r;
  r.trial = trial;
  for (const auto& step : protocol.steps) {
    switch (step.kind) {
      case StepKind::kMwPiHalf:
      case StepKind::kMwPiHalfCoherence:
        break;
      case StepKind::kPresqueeze:
        state.xi_sq_in = step.value;
        break;
      case StepKind::kMwSmallRotation:
        r.epsilon += step.value;
        if (spins) {
          spins = rotate_small(std::move(*spins), step.value);
        } else {
          state = rotate_small(state, step.value);
        }
        break;
      case StepKind::kLatticeOff:
        if (geometric) cloud = free_flight(std::move(cloud), step.duration_ms, physics.gravity);
        break;
      case StepKind::kLatticeOn:
        if (geometric) cloud = harmonic_evolve(std::move(cloud), physics.trap, step.duration_ms);
        break;
      case StepKind::kProbe: {
        ensure_spins();
        if (step.role == ProbeRole::kPreparation) {
          r.jz = j_z_total(*spins);
          const ProbeRecord rec = probe_quadrature(r.jz, step.probe, n, probe1_rng);
          r.theta1 = rec.inferred_theta;
          r.inferred_jz1 = rec.inferred_jz;
          if (geometric) {
            scratch.profile = coupling_profile(cloud, physics.mode, std::move(scratch.profile));
            r.prep = coupling_stats(scratch.profile, physics.delta_0);
            r.shift_prep_hz =
                cavity_shift(j_z_eff(*spins, scratch.profile, r.prep), r.prep);
          } else {
            r.prep = detail::homogeneous_stats(physics.atoms, physics.delta_0);
            r.shift_prep_hz = cavity_shift(r.jz, r.prep);
          }
        } else {
          const CouplingProfile* prof = nullptr;
          if (geometric) {
            scratch.profile = coupling_profile(cloud, physics.mode, physics.readout_regime,
                                               phase_rng, std::move(scratch.profile));
            prof = &scratch.profile;
          } else {
            prof = &*physics.injected_readout;
          }
          r.readout = coupling_stats(*prof, physics.delta_0);
          r.jz_eff = j_z_eff(*spins, *prof, r.readout);
          const ProbeRecord rec =
              probe_quadrature(r.jz_eff, step.probe, r.readout.n_eff, probe2_rng);
          r.theta2 = rec.inferred_theta;
          r.inferred_jz2 = rec.inferred_jz;
          r.shift_readout_hz = cavity_shift(r.jz_eff, r.readout);
        }
        break;
      }
    }
  }
  scratch.cloud = std::move(cloud);
  if (spins) scratch.spins = std::move(*spins);
  return r;
}

struct ExperimentOptions {
  std::size_t threads = 1;  // 0 = hardware concurrency
  std::size_t bootstrap_resamples = stats::kDefaultResamples;
  std::size_t histogram_bins = 30;
  double coherence_u = 0.0;  // 68% uncertainty of C fed into the xi^2 interval
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::uint64_t master_seed = 0;
  double delta_theta = 0.0;
  stats::BootstrapResult delta_theta_bootstrap;
  double delta_theta_sq = 0.0;
  double delta_theta_sq_ci68 = 0.0;
  double p_eff = 0.0;
  double p_eff_sem = 0.0;
  double n_eff = 0.0;
  double n_eff_sem = 0.0;
  double mean_eta = 0.0;
  double mean_eta_sq = 0.0;
  double prep_p_eff = 0.0;
  double mean_theta0 = 0.0;
  double mean_theta_eff = 0.0;
  double sem_theta_eff = 0.0;
  double sigma_sq_total = 0.0;  // sigma_1^2 + sigma_2^2 of the probes
  double angle_noise_prediction = 0.0;  // p/(N(1-p)) + sigma_1^2 + sigma_2^2
  double coherence = 0.0;
  SqueezingReport squeezing;
  stats::Histogram histogram;

  [[nodiscard]] std::size_t n_trials() const noexcept { return trials.size(); }
};

namespace detail {

inline const ProbeConfig* find_probe(const Protocol& p, ProbeRole role) {
  for (const auto& s : p.steps) {
    if (s.kind == StepKind::kProbe && s.role == role) return &s.probe;
  }
  return nullptr;
}

inline void run_trials(const Protocol& protocol, const PhysicsConfig& physics,
                       std::uint64_t master_seed, std::vector<TrialResult>& out,
                       std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, out.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = run_trial(protocol, physics, master_seed, i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < out.size(); i = next++) {
        out[i] = run_trial(protocol, physics, master_seed, i);
      }
    });
  }
}

}  // namespace detail

/// Aggregates per-trial statistics into a result. Trial order does not
/// affect any aggregate except through floating-point summation order.
inline ExperimentResult aggregate(std::vector<TrialResult> trials,
                                  const Protocol& protocol,
                                  const PhysicsConfig& physics,
                                  std::uint64_t master_seed,
                                  const ExperimentOptions& options = {}) {
  detail::require(trials.size() >= 2, "an experiment needs at least two trials");
  std::sort(trials.begin(), trials.end(),
            [](const TrialResult& a, const TrialResult& b) { return a.trial < b.trial; });
  ExperimentResult res;
  res.master_seed = master_seed;
  const std::size_t m = trials.size();
  std::vector<double> diff(m), p(m), neff(m), theta0(m), theta_eff(m);
  double eta = 0.0;
  double eta_sq = 0.0;
  double prep_p = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    diff[i] = trials[i].diff();
    p[i] = trials[i].readout.p_eff;
    neff[i] = trials[i].readout.n_eff;
    theta0[i] = trials[i].theta0();
    theta_eff[i] = trials[i].theta2;
    eta += trials[i].readout.mean_eta;
    eta_sq += trials[i].readout.mean_eta_sq;
    prep_p += trials[i].prep.p_eff;
  }
  res.mean_eta = eta / static_cast<double>(m);
  res.mean_eta_sq = eta_sq / static_cast<double>(m);
  res.prep_p_eff = prep_p / static_cast<double>(m);
  res.delta_theta_sq = stats::sample_variance(diff);
  res.delta_theta = std::sqrt(res.delta_theta_sq);
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  res.p_eff = stats::mean(p);
  res.p_eff_sem = stats::sample_std(p) / sqrt_m;
  res.n_eff = stats::mean(neff);
  res.n_eff_sem = stats::sample_std(neff) / sqrt_m;
  res.mean_theta0 = stats::mean(theta0);
  res.mean_theta_eff = stats::mean(theta_eff);
  res.sem_theta_eff = stats::sample_std(theta_eff) / sqrt_m;

  if (m >= 10) {
    RngStream boot(master_seed, ~std::uint64_t{0}, RngStream::kBootstrap);
    res.delta_theta_bootstrap =
        stats::bootstrap_std(diff, boot, options.bootstrap_resamples);
  } else {
    res.delta_theta_bootstrap.point_estimate = res.delta_theta;
    res.delta_theta_bootstrap.ci68_low = res.delta_theta_bootstrap.ci68_high = res.delta_theta;
  }
  res.delta_theta_sq_ci68 = 2.0 * res.delta_theta * res.delta_theta_bootstrap.std_error;

  const double n = static_cast<double>(physics.atoms);
  const ProbeConfig* p1 = detail::find_probe(protocol, ProbeRole::kPreparation);
  const ProbeConfig* p2 = detail::find_probe(protocol, ProbeRole::kReadout);
  res.sigma_sq_total = (p1 ? p1->angle_noise_var(n) : 0.0) +
                       (p2 ? p2->angle_noise_var(res.n_eff) : 0.0);
  res.angle_noise_prediction = res.p_eff / (n * (1.0 - res.p_eff)) + res.sigma_sq_total;

  res.coherence = protocol_coherence(protocol, physics);
  res.squeezing = wineland(res.delta_theta, res.n_eff, res.coherence);
  if (res.delta_theta > 0.0) {
    const auto ci = stats::propagate_xi_sq_ci(
        {res.delta_theta, res.delta_theta_bootstrap.std_error},
        {res.n_eff, res.n_eff_sem}, {res.coherence, options.coherence_u});
    res.squeezing.xi_sq_ci68_low = ci.ci68_low;
    res.squeezing.xi_sq_ci68_high = ci.ci68_high;
  }
  res.histogram = stats::histogram(diff, options.histogram_bins);
  res.trials = std::move(trials);
  return res;
}

/// Runs n_trials independent trials. Trial i always uses substream i of
/// master_seed, so the result does not depend on the thread count.
inline ExperimentResult run_experiment(const Protocol& protocol,
                                       const PhysicsConfig& physics,
                                       std::size_t n_trials,
                                       std::uint64_t master_seed,
                                       const ExperimentOptions& options = {}) {
  physics.validate();
  detail::require(n_trials >= 2, "an experiment needs at least two trials");
  std::vector<TrialResult> trials(n_trials);
  detail::run_trials(protocol, physics, master_seed, trials, options.threads);
  return aggregate(std::move(trials), protocol, physics, master_seed, options);
}

/// Settings for a free-fall sweep. The fig2 block regresses the readout
/// angle on the prepared angle at a few free-fall times, with the prepared
/// angle set through the initial tilt.
struct SweepConfig {
  std::vector<double> times_ms;
  ProtocolKind kind = ProtocolKind::kReleaseRecapture;
  /// Reshaping flight per time for delta-kick sweeps; empty means 0.5 ms.
  std::vector<double> reshape_ms;
  double epsilon = 0.0;
  ProbePair probes;
  HoldPolicy hold;
  std::size_t trials = 700;
  std::uint64_t seed = 1;
  ExperimentOptions options;

  std::size_t ramsey_points = 9;
  double ramsey_half_width = 0.2;
  double ramsey_noise = 0.002;

  bool css_estimate = false;

  std::vector<double> fig2_times_ms;
  std::vector<double> fig2_theta0;  // rad
  std::size_t fig2_trials = 0;
  std::size_t fig2_atoms = 0;  // 0 keeps the physics atom number

  void validate() const {
    detail::require(!times_ms.empty(), "sweep needs at least one free-fall time");
    for (double t : times_ms) {
      detail::require(t >= 0.0, "free-fall times must be nonnegative");
    }
    if (kind == ProtocolKind::kDeltaKick && !reshape_ms.empty()) {
      detail::require(reshape_ms.size() == times_ms.size(),
                      "one reshaping time per free-fall time");
    }
    detail::require(trials >= 2, "an experiment needs at least two trials");
    detail::require(ramsey_points >= 5, "Ramsey scan needs at least 5 points");
    if (!fig2_times_ms.empty()) {
      detail::require(fig2_theta0.size() >= 2, "fig2 needs at least two set points");
      detail::require(fig2_trials >= 2, "fig2 needs at least two trials per point");
    }
  }
};

struct SweepRow {
  double dt_ms = 0.0;
  double reshape_ms = 0.0;
  double hold_ms = 0.0;
  std::size_t trials = 0;
  double mean_eta = 0.0;
  double mean_eta_sq = 0.0;
  double n_eff = 0.0;
  double n_eff_sem = 0.0;
  double p_eff = 0.0;
  double p_eff_sem = 0.0;
  double delta_theta = 0.0;
  double delta_theta_u = 0.0;
  double delta_theta_sq = 0.0;
  double delta_theta_sq_u = 0.0;
  double angle_noise_theory = 0.0;
  double coherence = 0.0;  // value fed into xi^2
  double coherence_ramsey = 0.0;
  double coherence_ramsey_u = 0.0;
  SqueezingReport squeezing;
  double p_eff_css = std::numeric_limits<double>::quiet_NaN();
  double p_eff_css_u = std::numeric_limits<double>::quiet_NaN();
};

struct Fig2Point {
  double dt_ms = 0.0;
  double set_theta0 = 0.0;
  std::size_t trials = 0;
  double mean_theta0 = 0.0;
  double sem_theta0 = 0.0;
  double mean_theta_eff = 0.0;
  double sem_theta_eff = 0.0;
};

struct Fig2Fit {
  double dt_ms = 0.0;
  stats::FitResult fit;
};

struct SweepResult {
  std::size_t atoms = 0;
  double sigma_sq_total = 0.0;
  std::vector<SweepRow> rows;
  std::vector<Fig2Point> fig2_points;
  std::vector<Fig2Fit> fig2_fits;
};

namespace detail {

enum SweepStream : std::uint64_t {
  kSweepMain = 1,
  kSweepRamsey = 2,
  kSweepCss = 3,
  kSweepFig2 = 4,
};

inline std::uint64_t sweep_seed(std::uint64_t seed, SweepStream which,
                                std::uint64_t index) {
  return derive_seed(derive_seed(seed, which), index);
}

inline Protocol sweep_protocol(const SweepConfig& cfg, std::size_t i, double dt,
                               const PhysicsConfig& physics) {
  if (cfg.kind == ProtocolKind::kDeltaKick) {
    const double reshape = cfg.reshape_ms.empty() ? 0.5 : cfg.reshape_ms[i];
    return delta_kick_protocol(reshape, dt, cfg.epsilon, cfg.probes, cfg.hold,
                               physics);
  }
  return release_recapture_protocol(dt, cfg.epsilon, cfg.probes, cfg.hold, physics);
}

inline double protocol_hold(const Protocol& p) {
  double hold = 0.0;
  for (const auto& s : p.steps) {
    if (s.kind == StepKind::kLatticeOn) hold = s.duration_ms;
  }
  return p.free_fall_ms > 0.0 ? hold : 0.0;
}

}  // namespace detail

/// Regression of the mean readout angle on the mean preparation angle for
/// each fig2 free-fall time, one experiment per tilt set point.
inline std::pair<std::vector<Fig2Point>, std::vector<Fig2Fit>> fig2_regression(
    const SweepConfig& cfg, const PhysicsConfig& physics) {
  detail::require(!cfg.fig2_times_ms.empty(), "fig2 needs at least one free-fall time");
  detail::require(cfg.fig2_theta0.size() >= 2, "fig2 needs at least two set points");
  detail::require(cfg.fig2_trials >= 2, "fig2 needs at least two trials per point");
  std::vector<Fig2Point> points;
  std::vector<Fig2Fit> fits;
  PhysicsConfig fig2 = physics;
  if (cfg.fig2_atoms > 0) fig2.atoms = cfg.fig2_atoms;
  std::uint64_t index = 0;
  for (double dt : cfg.fig2_times_ms) {
    std::vector<double> x;
    std::vector<double> y;
    for (double set_point : cfg.fig2_theta0) {
      fig2.tilt = set_point;
      SweepConfig single = cfg;
      single.epsilon = 0.0;
      const Protocol protocol = detail::sweep_protocol(single, 0, dt, fig2);
      const ExperimentResult res = run_experiment(
          protocol, fig2, cfg.fig2_trials,
          detail::sweep_seed(cfg.seed, detail::kSweepFig2, index++), cfg.options);
      std::vector<double> theta0(res.trials.size());
      for (std::size_t k = 0; k < theta0.size(); ++k) {
        theta0[k] = res.trials[k].theta0();
      }
      Fig2Point pt;
      pt.dt_ms = dt;
      pt.set_theta0 = set_point;
      pt.trials = res.n_trials();
      pt.mean_theta0 = res.mean_theta0;
      pt.sem_theta0 =
          stats::sample_std(theta0) / std::sqrt(static_cast<double>(theta0.size()));
      pt.mean_theta_eff = res.mean_theta_eff;
      pt.sem_theta_eff = res.sem_theta_eff;
      points.push_back(pt);
      x.push_back(pt.mean_theta0);
      y.push_back(pt.mean_theta_eff);
    }
    fits.push_back({dt, stats::fit_zero_intercept(x, y)});
  }
  return {std::move(points), std::move(fits)};
}

/// Runs one experiment per free-fall time and, when configured, the fig2
/// angle regression. Every sub-experiment draws from its own seed derived
/// from cfg.seed, so rows do not depend on each other or on the grid order.
inline SweepResult sweep_freefall(const SweepConfig& cfg,
                                  const PhysicsConfig& physics) {
  cfg.validate();
  physics.validate();
  SweepResult out;
  out.atoms = physics.atoms;
  const double n = static_cast<double>(physics.atoms);
  const auto grid = ramsey_grid(cfg.ramsey_points, cfg.ramsey_half_width);

  for (std::size_t i = 0; i < cfg.times_ms.size(); ++i) {
    const double dt = cfg.times_ms[i];
    const Protocol protocol = detail::sweep_protocol(cfg, i, dt, physics);
    const ExperimentResult res = run_experiment(
        protocol, physics, cfg.trials,
        detail::sweep_seed(cfg.seed, detail::kSweepMain, i), cfg.options);

    SweepRow row;
    row.dt_ms = dt;
    row.reshape_ms = protocol.reshape_ms;
    row.hold_ms = detail::protocol_hold(protocol);
    row.trials = res.n_trials();
    row.mean_eta = res.mean_eta;
    row.mean_eta_sq = res.mean_eta_sq;
    row.n_eff = res.n_eff;
    row.n_eff_sem = res.n_eff_sem;
    row.p_eff = res.p_eff;
    row.p_eff_sem = res.p_eff_sem;
    row.delta_theta = res.delta_theta;
    row.delta_theta_u = res.delta_theta_bootstrap.std_error;
    row.delta_theta_sq = res.delta_theta_sq;
    row.delta_theta_sq_u = res.delta_theta_sq_ci68;
    row.angle_noise_theory = res.angle_noise_prediction;
    row.coherence = res.coherence;
    row.squeezing = res.squeezing;
    out.sigma_sq_total = res.sigma_sq_total;

    RngStream ramsey_rng(detail::sweep_seed(cfg.seed, detail::kSweepRamsey, i), 0,
                         RngStream::kRamsey);
    const RamseyResult ramsey =
        ramsey_coherence(res.coherence, grid, cfg.ramsey_noise, ramsey_rng);
    row.coherence_ramsey = ramsey.coherence;
    row.coherence_ramsey_u = ramsey.ci68;

    if (cfg.css_estimate) {
      PhysicsConfig css = physics;
      css.xi_sq_in = 1.0;
      const Protocol css_protocol = detail::sweep_protocol(cfg, i, dt, css);
      const ExperimentResult cres = run_experiment(
          css_protocol, css, cfg.trials,
          detail::sweep_seed(cfg.seed, detail::kSweepCss, i), cfg.options);
      std::vector<double> jz(cres.trials.size());
      double max_shift = 0.0;
      double delta_eff = 0.0;
      for (std::size_t k = 0; k < jz.size(); ++k) {
        jz[k] = cres.trials[k].inferred_jz2;
        max_shift += max_cavity_shift(cres.trials[k].readout);
        delta_eff += cres.trials[k].readout.delta_eff;
      }
      const double m = static_cast<double>(jz.size());
      const ProbeConfig& p2 = cfg.probes.readout;
      const double half = 0.5 * cres.n_eff;
      const double noise = p2.quadrature_noise_var /
                               (p2.discriminator * p2.discriminator) +
                           p2.spin_flip_noise_var * half * half;
      const EffectiveNumberEstimate est = estimate_p_eff_css(
          jz, max_shift / m, delta_eff / m, physics.atoms, noise);
      row.p_eff_css = est.p_eff;
      row.p_eff_css_u = est.n_eff * std::sqrt(2.0 / (m - 1.0)) / n;
    }
    out.rows.push_back(row);
  }

  if (!cfg.fig2_times_ms.empty()) {
    auto [points, fits] = fig2_regression(cfg, physics);
    out.fig2_points = std::move(points);
    out.fig2_fits = std::move(fits);
  }
  return out;
}

}  // namespace squeezesim
