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
/// Collective pseudo-spin states, per-atom spin samples, the collective
/// observables J_z and J_z,eff, and their moments.
///
/// With c = <eta>_e / <eta^2>_e the effective observable is
///   J_z,eff = c * sum_i eta_i j_z^(i),
/// normalised so that a fully polarised state gives N_eff / 2 and a coherent
/// state on the equator has variance N_eff / 4.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "squeezesim/coupling.hpp"
#include "squeezesim/errors.hpp"
#include "squeezesim/random.hpp"

namespace squeezesim {

inline constexpr double kMaxSmallAngle = 0.1;

struct CollectiveSpinState {
  std::size_t n = 0;
  double tilt_theta = 0.0;  // rad from the equator
  double xi_sq_in = 1.0;    // var(J_z) / (N/4)
  double coherence_c = 1.0;

  void validate() const {
    detail::require(n >= 1, "spin state needs at least one atom");
    detail::require(std::abs(tilt_theta) <= kMaxSmallAngle,
                    "tilt outside the small-angle range");
    detail::require(xi_sq_in > 0.0, "xi^2 must be positive");
    detail::require(coherence_c >= 0.0 && coherence_c <= 1.0,
                    "coherence must lie in [0, 1]");
  }
};

enum class SpinMode {
  kSurrogate,  // real-valued Gaussian surrogate
  kExact,      // every entry is +1/2 or -1/2
};

struct SpinSample {
  std::vector<double> j;
  SpinMode mode = SpinMode::kSurrogate;

  [[nodiscard]] std::size_t size() const noexcept { return j.size(); }
};

/// First and second moments of J_z and J_z,eff. The per-spin entries are
/// sigma = <j>, <j^2>, and the pair correlation <j^(i) j^(k)> for i != k.
struct SpinMoments {
  double mean_jz = 0.0;
  double var_jz = 0.0;
  double mean_jz_eff = 0.0;
  double var_jz_eff = 0.0;
  double var_diff = 0.0;  // var(J_z,eff - J_z)
  double sigma = 0.0;
  double mean_j_sq = 0.0;
  double pair_corr = 0.0;
  // Leading-order forms with <j^2> - <jj> replaced by 1/4.
  double var_jz_eff_approx = 0.0;
  double var_diff_approx = 0.0;
};

/// Coherent spin state as independent binary spins with
/// P(+1/2) = (1 + sin tilt) / 2.
inline SpinSample sample_css(std::size_t n, double tilt, RngStream& rng,
                             SpinSample storage = {}) {
  detail::require(n >= 1, "spin sample needs at least one atom");
  detail::require(std::abs(tilt) <= kMaxSmallAngle,
                  "tilt outside the small-angle range");
  const double p_up = 0.5 * (1.0 + std::sin(tilt));
  SpinSample s = std::move(storage);
  s.mode = SpinMode::kExact;
  s.j.resize(n);
  for (auto& v : s.j) v = rng.uniform() < p_up ? 0.5 : -0.5;
  return s;
}

/// Gaussian surrogate realising the target collective moments.
///
/// J_z ~ Normal(N sigma, xi^2 N / 4) with sigma = sin(tilt) / 2, spread over
/// the atoms as j_i = J_z / N + m_i where m is a zero-sum Gaussian vector.
/// The m_i are drawn i.i.d. with variance tau^2 = (1/4 - xi^2/(4N)) / (1 - 1/N)
/// and then centred, which leaves each entry with variance 1/4 - xi^2/(4N).
/// The per-spin variance is then exactly 1/4 and the pair correlation
/// (xi^2 - 1) / (4 (N - 1)).
inline SpinSample sample_squeezed(const CollectiveSpinState& state,
                                  RngStream& rng, SpinSample storage = {}) {
  state.validate();
  const double n = static_cast<double>(state.n);
  detail::require(state.n >= 2, "squeezed surrogate needs n >= 2");
  detail::require(state.xi_sq_in > 1.0 / n && state.xi_sq_in < n,
                  "xi^2 outside the admissible range (1/N, N)");
  const double sigma = 0.5 * std::sin(state.tilt_theta);
  const double jz = n * sigma + std::sqrt(state.xi_sq_in * n / 4.0) * rng.normal();
  const double tau =
      std::sqrt((0.25 - state.xi_sq_in / (4.0 * n)) / (1.0 - 1.0 / n));
  SpinSample s = std::move(storage);
  s.mode = SpinMode::kSurrogate;
  s.j.resize(state.n);
  double sum = 0.0;
  for (auto& v : s.j) {
    v = tau * rng.normal();
    sum += v;
  }
  const double offset = jz / n - sum / n;
  for (auto& v : s.j) v += offset;
  return s;
}

/// Small rotation about y. On the state this shifts the tilt; on a sample it
/// adds eps/2 to every j_z (the transverse spin component is ~1/2 per atom).
inline CollectiveSpinState rotate_small(CollectiveSpinState state, double eps) {
  detail::require(std::abs(eps) <= kMaxSmallAngle,
                  "rotation outside the small-angle range");
  state.tilt_theta += eps;
  return state;
}

inline SpinSample rotate_small(SpinSample sample, double eps) {
  detail::require(std::abs(eps) <= kMaxSmallAngle,
                  "rotation outside the small-angle range");
  if (eps == 0.0) return sample;
  for (auto& v : sample.j) v += 0.5 * eps;
  sample.mode = SpinMode::kSurrogate;
  return sample;
}

inline double j_z_total(const SpinSample& sample) {
  double sum = 0.0;
  for (double v : sample.j) sum += v;
  return sum;
}

inline double j_z_eff(const SpinSample& sample, const CouplingProfile& profile,
                      const CouplingStats& stats) {
  detail::require(sample.size() == profile.size(),
                  "spin sample and coupling profile differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sum += profile.eta[i] * sample.j[i];
  }
  return stats.weight_scale() * sum;
}

inline double j_z_eff(const SpinSample& sample, const CouplingProfile& profile) {
  detail::require(sample.size() == profile.size(),
                  "spin sample and coupling profile differ in length");
  return j_z_eff(sample, profile, coupling_stats(profile));
}

/// Closed-form moments for a permutation-symmetric state, exact for any
/// coupling profile:
///   var(J_z,eff)         = r^2 var(J_z) + N_eff (1 - r) (<j^2> - <jj>)
///   var(J_z,eff - J_z)   = p^2 var(J_z) + N_eff p (<j^2> - <jj>)
/// with r = N_eff / N = 1 - p.
inline SpinMoments moments_from_correlations(std::size_t n, double n_eff,
                                             double sigma, double mean_j_sq,
                                             double pair_corr) {
  detail::require(n >= 1, "moments need at least one atom");
  detail::require(n_eff > 0.0 && n_eff <= static_cast<double>(n) * (1 + 1e-12),
                  "N_eff must lie in (0, N]");
  const double dn = static_cast<double>(n);
  const double r = n_eff / dn;
  const double p = 1.0 - r;
  const double single = mean_j_sq - pair_corr;
  SpinMoments m;
  m.sigma = sigma;
  m.mean_j_sq = mean_j_sq;
  m.pair_corr = pair_corr;
  m.mean_jz = dn * sigma;
  m.var_jz = dn * single + dn * dn * (pair_corr - sigma * sigma);
  m.mean_jz_eff = r * m.mean_jz;
  m.var_jz_eff = r * r * m.var_jz + n_eff * p * single;
  m.var_diff = p * p * m.var_jz + n_eff * p * single;
  m.var_jz_eff_approx = r * r * m.var_jz + p * n_eff / 4.0;
  m.var_diff_approx = p * p * m.var_jz + p * n_eff / 4.0;
  return m;
}

/// Moments of a state near the equator with var(J_z) = xi^2 N / 4:
/// <j^2> = 1/4 + sigma^2 and <jj> = (xi^2 - 1) / (4 (N - 1)) + sigma^2.
inline SpinMoments moments_analytic(std::size_t n, double xi_sq, double p_eff,
                                    double sigma) {
  detail::require(n >= 2, "moments need at least two atoms");
  detail::require(xi_sq > 0.0, "xi^2 must be positive");
  detail::require(p_eff >= 0.0 && p_eff < 1.0, "p_eff must lie in [0, 1)");
  const double dn = static_cast<double>(n);
  const double mean_j_sq = 0.25 + sigma * sigma;
  const double pair = (xi_sq - 1.0) / (4.0 * (dn - 1.0)) + sigma * sigma;
  return moments_from_correlations(n, (1.0 - p_eff) * dn, sigma, mean_j_sq,
                                   pair);
}

inline constexpr std::size_t kMaxEnumerationAtoms = 20;

/// Exact moments of a tilted coherent state by summing over all 2^N binary
/// configurations with product Bernoulli weights.
inline SpinMoments enumerate_css_exact(const CouplingProfile& profile,
                                       double tilt) {
  const std::size_t n = profile.size();
  detail::require(n >= 1, "enumeration needs at least one atom");
  detail::require(n <= kMaxEnumerationAtoms,
                  "enumeration refused: more than 20 atoms");
  detail::require(std::abs(tilt) <= kMaxSmallAngle,
                  "tilt outside the small-angle range");
  const CouplingStats stats = coupling_stats(profile);
  const long double scale = static_cast<long double>(stats.mean_eta) /
                            static_cast<long double>(stats.mean_eta_sq);
  const long double p_up = 0.5L * (1.0L + std::sin(static_cast<long double>(tilt)));
  long double s_w = 0, s_j = 0, s_jj = 0, s_e = 0, s_ee = 0, s_d = 0, s_dd = 0;
  const std::uint64_t configs = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < configs; ++bits) {
    long double w = 1.0L;
    long double jz = 0.0L;
    long double weighted = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (bits >> i) & 1u;
      w *= up ? p_up : 1.0L - p_up;
      const long double j = up ? 0.5L : -0.5L;
      jz += j;
      weighted += static_cast<long double>(profile.eta[i]) * j;
    }
    const long double eff = scale * weighted;
    const long double d = eff - jz;
    s_w += w;
    s_j += w * jz;
    s_jj += w * jz * jz;
    s_e += w * eff;
    s_ee += w * eff * eff;
    s_d += w * d;
    s_dd += w * d * d;
  }
  SpinMoments m;
  m.mean_jz = static_cast<double>(s_j / s_w);
  m.var_jz = static_cast<double>(s_jj / s_w - (s_j / s_w) * (s_j / s_w));
  m.mean_jz_eff = static_cast<double>(s_e / s_w);
  m.var_jz_eff = static_cast<double>(s_ee / s_w - (s_e / s_w) * (s_e / s_w));
  m.var_diff = static_cast<double>(s_dd / s_w - (s_d / s_w) * (s_d / s_w));
  const long double sigma = p_up - 0.5L;
  m.sigma = static_cast<double>(sigma);
  m.mean_j_sq = 0.25;
  m.pair_corr = static_cast<double>(sigma * sigma);
  const double p = stats.p_eff;
  m.var_jz_eff_approx = (1 - p) * (1 - p) * m.var_jz + p * stats.n_eff / 4.0;
  m.var_diff_approx = p * p * m.var_jz + p * stats.n_eff / 4.0;
  return m;
}

}  // namespace squeezesim
