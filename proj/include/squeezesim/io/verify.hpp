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

/// Self-checks run by the verify command: exact enumeration against closed
/// forms, sampled moments against enumeration, the angle-resolution formula
/// against Monte Carlo, and CSV headers against pinned schemas.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "squeezesim/coupling.hpp"
#include "squeezesim/io/calibrate.hpp"
#include "squeezesim/io/config.hpp"
#include "squeezesim/io/csv_schema.hpp"
#include "squeezesim/io/results.hpp"
#include "squeezesim/measurement.hpp"
#include "squeezesim/protocols.hpp"
#include "squeezesim/random.hpp"
#include "squeezesim/spinmodel.hpp"
#include "squeezesim/stats.hpp"

namespace squeezesim::io {

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double deviation = 0.0;  // in the unit named by metric
  double bound = 0.0;
  std::string metric;      // "abs", "sigma", "ratio", "match"
};

inline Check check_abs(std::string name, double measured, double expected, double tol) {
  const double dev = std::abs(measured - expected);
  return {std::move(name), dev <= tol, measured, expected, dev, tol, "abs"};
}

inline Check check_sigma(std::string name, double measured, double expected,
                         double std_error, double bound) {
  const double dev = std_error > 0.0 ? std::abs(measured - expected) / std_error
                                     : (measured == expected ? 0.0 : INFINITY);
  return {std::move(name), dev <= bound, measured, expected, dev, bound, "sigma"};
}

/// The three N = 8 coupling fixtures: homogeneous, two-level, random.
inline std::vector<std::pair<std::string, CouplingProfile>> oracle_fixtures() {
  CouplingProfile homogeneous{std::vector<double>(8, 1.0)};
  CouplingProfile two_level{{1, 1, 1, 1, 0.5, 0.5, 0.5, 0.5}};
  CouplingProfile random_eta;
  RngStream rng(20260101, 0);
  for (int i = 0; i < 8; ++i) random_eta.eta.push_back(0.05 + 0.95 * rng.uniform());
  return {{"homogeneous", homogeneous}, {"two_level", two_level}, {"random", random_eta}};
}

/// Sample means and variances of J_z, J_z,eff and J_z,eff - J_z with their
/// standard errors.
struct EmpiricalMoments {
  std::array<double, 5> value{};      // mean_jz, var_jz, mean_eff, var_eff, var_diff
  std::array<double, 5> std_error{};
};

inline EmpiricalMoments empirical_moments(
    const CouplingProfile& profile, std::size_t draws,
    const std::function<SpinSample(RngStream&)>& sampler, std::uint64_t seed) {
  const CouplingStats cs = coupling_stats(profile);
  // Accumulate raw power sums of the three observables.
  std::array<std::array<long double, 4>, 3> pow_sum{};
  for (std::size_t k = 0; k < draws; ++k) {
    RngStream rng(seed, k);
    const SpinSample s = sampler(rng);
    const double jz = j_z_total(s);
    const double eff = j_z_eff(s, profile, cs);
    const double obs[3] = {jz, eff, eff - jz};
    for (int o = 0; o < 3; ++o) {
      long double p = 1.0L;
      for (int e = 0; e < 4; ++e) {
        p *= obs[o];
        pow_sum[o][e] += p;
      }
    }
  }
  const long double m = static_cast<long double>(draws);
  const auto describe = [&](int o, double& mean, double& mean_se, double& var,
                            double& var_se) {
    const long double m1 = pow_sum[o][0] / m;
    const long double m2 = pow_sum[o][1] / m;
    const long double m3 = pow_sum[o][2] / m;
    const long double m4 = pow_sum[o][3] / m;
    const long double c2 = m2 - m1 * m1;
    const long double c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1;
    mean = static_cast<double>(m1);
    var = static_cast<double>(c2 * m / (m - 1));
    mean_se = static_cast<double>(std::sqrt(std::max(c2, 0.0L) / m));
    var_se = static_cast<double>(std::sqrt(std::max(c4 - c2 * c2, 0.0L) / m));
  };
  EmpiricalMoments out;
  double unused_mean = 0.0;
  double unused_se = 0.0;
  describe(0, out.value[0], out.std_error[0], out.value[1], out.std_error[1]);
  describe(1, out.value[2], out.std_error[2], out.value[3], out.std_error[3]);
  describe(2, unused_mean, unused_se, out.value[4], out.std_error[4]);
  return out;
}

inline std::array<double, 5> moment_array(const SpinMoments& m) {
  return {m.mean_jz, m.var_jz, m.mean_jz_eff, m.var_jz_eff, m.var_diff};
}

inline const std::array<const char*, 5>& moment_names() {
  static const std::array<const char*, 5> names{"mean_jz", "var_jz", "mean_jz_eff",
                                                "var_jz_eff", "var_diff"};
  return names;
}

/// Enumeration equals the closed forms; sampled coherent and surrogate
/// states match the enumeration within the configured sigma bound.
inline std::vector<Check> oracle_suite(const VerifySettings& v, std::uint64_t seed) {
  std::vector<Check> out;
  const double tilt = 0.02;
  for (const auto& [label, profile] : oracle_fixtures()) {
    const CouplingStats cs = coupling_stats(profile);
    const std::size_t n = profile.size();
    const double sigma = 0.5 * std::sin(tilt);
    const SpinMoments exact = enumerate_css_exact(profile, tilt);
    const SpinMoments closed =
        moments_from_correlations(n, cs.n_eff, sigma, 0.25, sigma * sigma);
    const auto e = moment_array(exact);
    const auto c = moment_array(closed);
    for (std::size_t i = 0; i < 5; ++i) {
      const double scale = std::max(1.0, std::abs(c[i]));
      out.push_back(check_abs("oracle.enumeration." + label + "." + moment_names()[i],
                              e[i] / scale, c[i] / scale, v.oracle_tolerance));
    }

    const auto css = empirical_moments(
        profile, v.surrogate_draws,
        [&, n = n](RngStream& rng) { return sample_css(n, tilt, rng); },
        derive_seed(seed, 11));
    for (std::size_t i = 0; i < 5; ++i) {
      out.push_back(check_sigma("oracle.css_sampling." + label + "." + moment_names()[i],
                                css.value[i], e[i], css.std_error[i],
                                v.surrogate_sigma_bound));
    }

    const SpinMoments flat = enumerate_css_exact(profile, 0.0);
    const auto f = moment_array(flat);
    const auto sur = empirical_moments(
        profile, v.surrogate_draws,
        [&, n = n](RngStream& rng) {
          return sample_squeezed(CollectiveSpinState{n, 0.0, 1.0, 1.0}, rng);
        },
        derive_seed(seed, 12));
    for (std::size_t i = 0; i < 5; ++i) {
      out.push_back(check_sigma("oracle.surrogate." + label + "." + moment_names()[i],
                                sur.value[i], f[i], sur.std_error[i],
                                v.surrogate_sigma_bound));
    }
  }
  return out;
}

/// var(theta_2 - theta_1) from the full trial pipeline with an injected
/// readout profile against p/(N(1-p)) + sigma_1^2 + sigma_2^2, judged by
/// chi-square bounds on a sample variance.
inline Check angle_noise_check(std::size_t atoms, double p_target, double xi_sq,
                       double sigma1, double sigma2, std::size_t trials,
                       double sigma_bound, std::uint64_t seed,
                       std::size_t threads = 1) {
  PhysicsConfig ph;
  ph.atoms = atoms;
  ph.xi_sq_in = xi_sq;
  ph.coherence = 1.0;
  ph.injected_readout = two_level_profile(atoms, p_target);
  const CouplingStats cs = coupling_stats(*ph.injected_readout);
  const ProbePair probes{ProbeConfig::from_angle_variance(sigma1 * sigma1, 0.6),
                         ProbeConfig::from_angle_variance(sigma2 * sigma2, 1.0)};
  const Protocol protocol =
      release_recapture_protocol(0.0, 0.0, probes, HoldPolicy::fixed(0.0), ph);
  ExperimentOptions opt;
  opt.threads = threads;
  opt.bootstrap_resamples = 2;
  const ExperimentResult r = run_experiment(protocol, ph, trials, seed, opt);
  const double expected =
      delta_theta_analytic(static_cast<double>(atoms), std::max(cs.p_eff, 0.0), sigma1, sigma2);
  const double ratio = r.delta_theta_sq / expected;
  const stats::Bounds b = stats::variance_ratio_bounds(trials, sigma_bound);
  Check c;
  c.name = "analytic.angle_noise.p" + format_double(p_target) + ".xi" + format_double(xi_sq);
  c.measured = r.delta_theta_sq;
  c.expected = expected;
  c.deviation = ratio;
  c.bound = ratio < 1.0 ? b.low : b.high;
  c.metric = "ratio";
  c.passed = ratio >= b.low && ratio <= b.high;
  return c;
}

inline std::vector<Check> analytic_suite(const VerifySettings& v, std::uint64_t seed,
                                         std::size_t threads = 1) {
  std::vector<Check> out;
  std::uint64_t index = 0;
  for (double xi : {0.05, 1.0}) {
    for (double p : {0.0, 0.05, 0.1, 0.2, 0.4}) {
      out.push_back(angle_noise_check(v.atoms, p, xi, 300e-6, 300e-6, v.trials, v.sigma_bound,
                              derive_seed(seed, 100 + index++), threads));
    }
  }
  const SqueezingReport w = wineland(298e-6, 5e5, 0.96);
  out.push_back(check_abs("analytic.wineland_reference_db", w.xi_db, -13.2, 0.3));
  out.push_back(check_abs("analytic.wineland_css_limit",
                          wineland(1.0 / std::sqrt(1e4), 1e4, 1.0).xi_sq, 1.0, 1e-12));
  return out;
}

/// Headers produced by the writers against the registry and against any
/// fingerprints pinned in the configuration.
inline std::vector<Check> schema_suite(const VerifySettings& v) {
  std::vector<Check> out;
  const SweepResult empty_sweep;
  const std::vector<std::pair<std::string, std::string>> emitted{
      {"trials", trials_csv({})},      {"fig2", fig2_csv(empty_sweep)},
      {"fig2_fit", fig2_fit_csv(empty_sweep)}, {"fig3a", fig3a_csv(empty_sweep)},
      {"fig3b", fig3b_csv(empty_sweep)},       {"fig4a", fig4a_csv(empty_sweep)},
      {"fig4b", fig4b_csv(empty_sweep)},       {"calibration", calibration_csv({})},
  };
  for (const auto& [name, text] : emitted) {
    const CsvSchema* s = find_schema(name);
    const std::string header = text.substr(0, text.find('\n'));
    Check c;
    c.name = "schema." + name;
    c.metric = "match";
    bool ok = s != nullptr && header == s->header();
    const auto pinned = v.pinned_schemas.find(name);
    if (ok && pinned != v.pinned_schemas.end()) {
      ok = pinned->second == s->fingerprint();
    }
    c.passed = ok;
    c.deviation = ok ? 0.0 : 1.0;
    out.push_back(c);
  }
  return out;
}

inline Json checks_json(const std::vector<Check>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"metric", c.metric},
                   {"measured", number(c.measured)},
                   {"expected", number(c.expected)},
                   {"deviation", number(c.deviation)},
                   {"bound", number(c.bound)}});
  }
  return arr;
}

}  // namespace squeezesim::io
