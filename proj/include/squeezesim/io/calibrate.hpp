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

/// Mean-coupling calibration: fit the mode geometry to the trapped cloud,
/// then reproduce the shift-versus-atom-number procedure for each free-fall
/// time and normalise the fitted slopes by the reference series.

#include <cstddef>
#include <string>
#include <vector>

#include "squeezesim/coupling.hpp"
#include "squeezesim/ensemble.hpp"
#include "squeezesim/io/config.hpp"
#include "squeezesim/io/csv_schema.hpp"
#include "squeezesim/io/results.hpp"
#include "squeezesim/measurement.hpp"
#include "squeezesim/protocols.hpp"
#include "squeezesim/random.hpp"
#include "squeezesim/stats.hpp"

namespace squeezesim::io {

struct CalibrationRow {
  double dt_ms = 0.0;
  MeanEtaCalibration fit;
  double mean_eta_geometric = 0.0;  // average over the simulated clouds
  std::size_t points_used = 0;
};

struct CalibrationReport {
  CavityMode mode;
  bool homogeneous = false;
  double longitudinal_share = 0.0;
  ExpectedCoupling expected;    // closed form for the trapped cloud
  double sampled_mean_eta = 0.0;
  double sampled_mean_eta_sem = 0.0;
  double reference_mean_eta = 0.0;
  std::vector<CalibrationRow> rows;
};

/// The cloud after release for dt and recapture under the configured hold.
inline AtomCloud released_cloud(AtomCloud cloud, const RunConfig& c, double dt) {
  const PhysicsConfig& ph = c.physics;
  if (dt <= 0.0) return cloud;
  const auto at_recapture = flight_summary(ph.trapped_summary(), dt, ph.gravity);
  const double hold = c.protocol.hold.kind == HoldPolicy::Kind::kFixed
                          ? c.protocol.hold.fixed_ms
                          : recompression_time(at_recapture, ph.trap);
  cloud = free_flight(std::move(cloud), dt, ph.gravity);
  return harmonic_evolve(std::move(cloud), ph.trap, hold);
}

/// Runs the calibration for the configured geometry. The maximum shift at
/// each atom count is delta_eff N_eff / 2 of a simulated cloud (plus optional
/// Gaussian readout noise); shifts beyond the cap are dropped as the lock
/// would lose them.
inline CalibrationReport run_calibration(const RunConfig& c) {
  const PhysicsConfig& ph = c.physics;
  const CalibrateSettings& s = c.calibrate;
  CalibrationReport rep;
  rep.mode = ph.mode;
  rep.homogeneous = std::isinf(ph.mode.waist_um) && ph.mode.delta_k == 0.0;
  rep.longitudinal_share = c.geometry ? c.geometry->longitudinal_share : 0.0;
  rep.expected = expected_coupling(ph.mode, ph.trapped_summary());
  rep.reference_mean_eta = rep.homogeneous ? 1.0 : c.calibration.target_mean_eta;

  std::vector<double> trapped_eta;
  std::vector<CalibrationSeries> series;
  std::vector<double> geometric;
  std::uint64_t stream = 0;
  for (double dt : s.times_ms) {
    CalibrationSeries cs;
    cs.dt_ms = dt;
    double eta_sum = 0.0;
    std::size_t eta_count = 0;
    for (double count : s.atom_counts) {
      double shift = 0.0;
      for (std::size_t k = 0; k < s.clouds; ++k) {
        RngStream rng(c.seed, stream++, RngStream::kCloud);
        AtomCloud cloud = sample_thermal_cloud(
            static_cast<std::size_t>(count), ph.temperature_uK,
            ph.rms_radius_transverse_um, ph.rms_radius_longitudinal_um, rng);
        cloud = released_cloud(std::move(cloud), c, dt);
        const CouplingStats st = coupling_stats(coupling_profile(cloud, ph.mode), ph.delta_0);
        shift += max_cavity_shift(st);
        eta_sum += st.mean_eta;
        ++eta_count;
        if (dt == s.times_ms.front()) trapped_eta.push_back(st.mean_eta);
      }
      shift /= static_cast<double>(s.clouds);
      if (s.shift_noise_hz > 0.0) {
        RngStream noise(c.seed, stream++, RngStream::kProbe2);
        shift += s.shift_noise_hz * noise.normal();
      }
      if (shift <= s.shift_cap_hz) {
        cs.atom_counts.push_back(count);
        cs.max_shifts_hz.push_back(shift);
      }
    }
    if (cs.atom_counts.size() < 3) {
      throw DegenerateError("fewer than three shifts below the cap at dt = " +
                            format_double(dt) + " ms");
    }
    geometric.push_back(eta_sum / static_cast<double>(eta_count));
    series.push_back(std::move(cs));
  }
  const auto fits = calibrate_mean_eta(series, rep.reference_mean_eta);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    rep.rows.push_back({s.times_ms[i], fits[i], geometric[i], series[i].atom_counts.size()});
  }
  rep.sampled_mean_eta = stats::mean(trapped_eta);
  rep.sampled_mean_eta_sem =
      trapped_eta.size() > 1
          ? stats::sample_std(trapped_eta) / std::sqrt(static_cast<double>(trapped_eta.size()))
          : 0.0;
  return rep;
}

inline std::string calibration_csv(const CalibrationReport& r) {
  CsvWriter w(schema("calibration"));
  for (const auto& row : r.rows) {
    w.field(row.dt_ms).field(row.fit.mean_eta).field(row.fit.mean_eta_ci68)
        .field(row.mean_eta_geometric).field(row.fit.fit.slope)
        .field(row.fit.fit.slope_ci68).field(row.points_used);
    w.end_row();
  }
  return w.str();
}

inline Json calibration_json(const CalibrationReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"dt_ms", row.dt_ms},
                    {"mean_eta", row.fit.mean_eta},
                    {"mean_eta_ci68", row.fit.mean_eta_ci68},
                    {"mean_eta_geometric", row.mean_eta_geometric},
                    {"slope_hz_per_atom", row.fit.fit.slope},
                    {"slope_ci68", number(row.fit.fit.slope_ci68)},
                    {"intercept_hz", row.fit.fit.intercept},
                    {"points_used", row.points_used}});
  }
  return Json{{"geometry",
               {{"waist_um", number(r.mode.waist_um)},
                {"delta_k", r.mode.delta_k},
                {"homogeneous", r.homogeneous},
                {"longitudinal_share", r.longitudinal_share},
                {"transverse_factor", r.expected.transverse},
                {"longitudinal_factor", r.expected.longitudinal},
                {"mean_eta", r.expected.mean_eta()},
                {"sampled_mean_eta", r.sampled_mean_eta},
                {"sampled_mean_eta_sem", r.sampled_mean_eta_sem}}},
              {"reference_mean_eta", r.reference_mean_eta},
              {"rows", rows}};
}

/// [cavity] block reproducing the calibrated geometry without refitting.
inline std::string geometry_ini(const CalibrationReport& r) {
  std::string s = "[cavity]\n";
  if (r.homogeneous) return s + "homogeneous = true\n";
  s += "waist_um = " + format_double(r.mode.waist_um) + "\n";
  s += "delta_k = " + format_double(r.mode.delta_k) + "\n";
  return s;
}

}  // namespace squeezesim::io
