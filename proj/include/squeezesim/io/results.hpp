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

/// JSON documents and CSV tables for run results.
///
/// Files hold full-precision numbers and nothing that varies between runs
/// with equal inputs (no timestamps, host names or timings).

#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "squeezesim/format.hpp"
#include "squeezesim/io/config.hpp"
#include "squeezesim/io/csv_schema.hpp"
#include "squeezesim/protocols.hpp"

#ifndef SQUEEZESIM_VERSION
#define SQUEEZESIM_VERSION "0.1.0"
#endif

namespace squeezesim::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSoftwareName = "squeezesim";
inline constexpr const char* kSoftwareVersion = SQUEEZESIM_VERSION;

/// Non-finite values become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

inline const char* to_string(ProtocolKind k) {
  return k == ProtocolKind::kDeltaKick ? "dk" : "rr";
}

inline Json software_json() {
  return Json{{"name", kSoftwareName}, {"version", kSoftwareVersion}};
}

/// Resolved configuration, defaults included.
inline Json config_json(const RunConfig& c) {
  const PhysicsConfig& ph = c.physics;
  Json j;
  j["run"] = {{"schema", c.schema_version},
              {"atoms", ph.atoms},
              {"trials", c.trials},
              {"seed", c.seed}};
  j["cloud"] = {{"temperature_uK", ph.temperature_uK},
                {"rms_transverse_um", ph.rms_radius_transverse_um},
                {"rms_longitudinal_um", ph.rms_radius_longitudinal_um}};
  j["trap"] = {{"depth_uK", ph.trap.depth_uK},
               {"lattice_waist_um", c.lattice_waist_um},
               {"transverse_omega", ph.trap.transverse_omega},
               {"longitudinal_omega", ph.trap.longitudinal_omega},
               {"lattice_wavelength_nm", ph.trap.lattice_wavelength_nm},
               {"switching_time_us", ph.trap.switching_time_us}};
  j["gravity"] = {{"g", vec_json(ph.gravity.g)}};
  j["cavity"] = {{"waist_um", number(ph.mode.waist_um)},
                 {"delta_k", ph.mode.delta_k},
                 {"probe_wavelength_nm", ph.mode.probe_wavelength_nm},
                 {"calibrate", c.calibration.enabled},
                 {"target_mean_eta", c.calibration.target_mean_eta},
                 {"longitudinal_share", c.calibration.longitudinal_share},
                 {"delta_0_hz", ph.delta_0},
                 {"readout_regime",
                  ph.readout_regime == LongitudinalRegime::kFree ? "free" : "pinned"}};
  j["spin"] = {{"xi_sq_in", ph.xi_sq_in},
               {"tilt", ph.tilt},
               {"coherence", ph.coherence},
               {"mode", ph.spin_mode == SpinMode::kExact ? "exact" : "surrogate"}};
  const auto probe = [](const ProbeConfig& p) {
    return Json{{"discriminator", p.discriminator},
                {"quadrature_noise_var", p.quadrature_noise_var},
                {"spin_flip_noise_var", p.spin_flip_noise_var},
                {"strength", p.strength_label}};
  };
  j["probes"] = {{"sigma_total_urad", c.sigma_total * 1e6},
                 {"prep_share", c.prep_share},
                 {"preparation", probe(c.probes.preparation)},
                 {"readout", probe(c.probes.readout)}};
  const ProtocolSettings& p = c.protocol;
  j["protocol"] = {{"kind", to_string(p.kind)},
                   {"dt_ms", p.dt_ms},
                   {"reshape_ms", p.reshape_ms},
                   {"epsilon", p.epsilon},
                   {"hold", p.hold.kind == HoldPolicy::Kind::kFixed ? "fixed" : "recompress"},
                   {"hold_ms", p.hold.fixed_ms},
                   {"kick_hold_ms", p.kick_hold_ms ? Json(*p.kick_hold_ms) : Json(nullptr)},
                   {"extra_segment_contrast", ph.extra_segment_contrast}};
  const SweepConfig& s = c.sweep;
  j["sweep"] = {{"times_ms", s.times_ms},
                {"reshape_ms", s.reshape_ms},
                {"ramsey_points", s.ramsey_points},
                {"ramsey_half_width", s.ramsey_half_width},
                {"ramsey_noise", s.ramsey_noise},
                {"css_estimate", s.css_estimate},
                {"fig2_times_ms", s.fig2_times_ms},
                {"fig2_theta0", s.fig2_theta0},
                {"fig2_trials", s.fig2_trials},
                {"fig2_atoms", s.fig2_atoms},
                {"bootstrap_resamples", s.options.bootstrap_resamples}};
  j["calibrate"] = {{"times_ms", c.calibrate.times_ms},
                    {"atom_counts", c.calibrate.atom_counts},
                    {"shift_cap_hz", c.calibrate.shift_cap_hz},
                    {"clouds", c.calibrate.clouds},
                    {"shift_noise_hz", c.calibrate.shift_noise_hz}};
  return j;
}

/// How the trapped-cloud inhomogeneity is split between the transverse
/// mode profile and the longitudinal mismatch.
inline Json coupling_split_json(const RunConfig& c) {
  const ExpectedCoupling e = expected_coupling(c.physics.mode, c.physics.trapped_summary());
  return Json{{"calibrated", c.geometry.has_value()},
              {"longitudinal_share",
               c.geometry ? Json(c.geometry->longitudinal_share) : Json(nullptr)},
              {"transverse_factor", e.transverse},
              {"longitudinal_factor", e.longitudinal},
              {"mean_eta", e.mean_eta()},
              {"waist_um", number(c.physics.mode.waist_um)},
              {"delta_k", c.physics.mode.delta_k}};
}

inline Json protocol_json(const Protocol& p) {
  Json steps = Json::array();
  for (const auto& s : p.steps) {
    Json step{{"kind", squeezesim::to_string(s.kind)}};
    switch (s.kind) {
      case StepKind::kLatticeOff:
      case StepKind::kLatticeOn:
        step["duration_ms"] = s.duration_ms;
        break;
      case StepKind::kMwSmallRotation:
        step["epsilon"] = s.value;
        break;
      case StepKind::kPresqueeze:
        step["xi_sq"] = s.value;
        break;
      case StepKind::kProbe:
        step["role"] = s.role == ProbeRole::kPreparation ? "preparation" : "readout";
        step["strength"] = s.probe.strength_label;
        break;
      default:
        break;
    }
    steps.push_back(step);
  }
  return Json{{"kind", to_string(p.kind)},
              {"label", p.label},
              {"free_fall_ms", p.free_fall_ms},
              {"reshape_ms", p.reshape_ms},
              {"epsilon", p.epsilon},
              {"steps", steps},
              {"serialized", serialize(p)}};
}

inline Json squeezing_json(const SqueezingReport& r) {
  return Json{{"delta_theta", r.delta_theta},
              {"n_eff", r.n_eff},
              {"coherence", r.coherence},
              {"xi_sq", number(r.xi_sq)},
              {"xi_db", number(r.xi_db)},
              {"xi_sq_ci68_low", number(r.xi_sq_ci68_low)},
              {"xi_sq_ci68_high", number(r.xi_sq_ci68_high)}};
}

inline Json experiment_json(const ExperimentResult& r) {
  Json hist{{"edges", r.histogram.edges}, {"counts", r.histogram.counts}};
  return Json{{"trials", r.n_trials()},
              {"master_seed", r.master_seed},
              {"delta_theta", r.delta_theta},
              {"delta_theta_u", r.delta_theta_bootstrap.std_error},
              {"delta_theta_ci68_low", r.delta_theta_bootstrap.ci68_low},
              {"delta_theta_ci68_high", r.delta_theta_bootstrap.ci68_high},
              {"bootstrap_resamples", r.delta_theta_bootstrap.n_resamples},
              {"delta_theta_sq", r.delta_theta_sq},
              {"delta_theta_sq_ci68", r.delta_theta_sq_ci68},
              {"p_eff", r.p_eff},
              {"p_eff_sem", r.p_eff_sem},
              {"n_eff", r.n_eff},
              {"n_eff_sem", r.n_eff_sem},
              {"mean_eta", r.mean_eta},
              {"mean_eta_sq", r.mean_eta_sq},
              {"prep_p_eff", r.prep_p_eff},
              {"mean_theta0", r.mean_theta0},
              {"mean_theta_eff", r.mean_theta_eff},
              {"sem_theta_eff", r.sem_theta_eff},
              {"sigma_sq_total", r.sigma_sq_total},
              {"angle_noise_prediction", r.angle_noise_prediction},
              {"coherence", r.coherence},
              {"squeezing", squeezing_json(r.squeezing)},
              {"histogram_theta_eff_minus_theta0", hist}};
}

inline Json sweep_row_json(const SweepRow& row) {
  return Json{{"dt_ms", row.dt_ms},
              {"reshape_ms", row.reshape_ms},
              {"hold_ms", row.hold_ms},
              {"trials", row.trials},
              {"mean_eta", row.mean_eta},
              {"mean_eta_sq", row.mean_eta_sq},
              {"n_eff", row.n_eff},
              {"n_eff_sem", row.n_eff_sem},
              {"p_eff", row.p_eff},
              {"p_eff_sem", row.p_eff_sem},
              {"delta_theta", row.delta_theta},
              {"delta_theta_u", row.delta_theta_u},
              {"delta_theta_sq", row.delta_theta_sq},
              {"delta_theta_sq_ci68", row.delta_theta_sq_u},
              {"theory_delta_theta_sq", row.angle_noise_theory},
              {"coherence", row.coherence},
              {"coherence_ramsey", row.coherence_ramsey},
              {"coherence_ramsey_ci68", row.coherence_ramsey_u},
              {"p_eff_css", number(row.p_eff_css)},
              {"p_eff_css_u", number(row.p_eff_css_u)},
              {"squeezing", squeezing_json(row.squeezing)}};
}

inline Json sweep_json(const SweepResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(sweep_row_json(row));
  Json fits = Json::array();
  for (const auto& f : r.fig2_fits) {
    fits.push_back({{"dt_ms", f.dt_ms},
                    {"slope", f.fit.slope},
                    {"slope_ci68", number(f.fit.slope_ci68)},
                    {"points", f.fit.n}});
  }
  return Json{{"atoms", r.atoms},
              {"sigma_sq_total", r.sigma_sq_total},
              {"rows", rows},
              {"fig2_fits", fits}};
}

inline Json schemas_json() {
  Json j = Json::object();
  for (const auto& s : csv_schemas()) j[s.name] = s.fingerprint();
  return j;
}

/// Top-level document shared by every command.
inline Json document(const std::string& command, const RunConfig& c) {
  return Json{{"software", software_json()},
              {"command", command},
              {"config", config_json(c)},
              {"coupling_split", coupling_split_json(c)},
              {"csv_schemas", schemas_json()}};
}

// ---------------------------------------------------------------- CSV ----

/// Writes one CSV table in a fixed schema. Rows are appended field by
/// field and must match the header width.
class CsvWriter {
 public:
  explicit CsvWriter(const CsvSchema& schema) : schema_(schema) {
    out_ << schema.header() << '\n';
  }

  CsvWriter& field(double v) { return raw(format_double(v)); }
  CsvWriter& field(std::size_t v) { return raw(std::to_string(v)); }

  void end_row() {
    squeezesim::detail::require(column_ == schema_.columns.size(),
                    "CSV row does not match its schema width");
    out_ << '\n';
    column_ = 0;
  }

  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  CsvWriter& raw(const std::string& s) {
    if (column_ > 0) out_ << ',';
    out_ << s;
    ++column_;
    return *this;
  }

  const CsvSchema& schema_;
  std::ostringstream out_;
  std::size_t column_ = 0;
};

inline const CsvSchema& schema(const char* name) {
  const CsvSchema* s = find_schema(name);
  squeezesim::detail::require(s != nullptr, "unknown CSV schema");
  return *s;
}

inline std::string trials_csv(const std::vector<TrialResult>& trials) {
  CsvWriter w(schema("trials"));
  for (const auto& t : trials) {
    w.field(static_cast<std::size_t>(t.trial))
        .field(t.theta1)
        .field(t.theta2)
        .field(t.epsilon)
        .field(t.theta0())
        .field(t.diff())
        .field(t.jz)
        .field(t.jz_eff)
        .field(t.prep.mean_eta)
        .field(t.prep.n_eff)
        .field(t.readout.mean_eta)
        .field(t.readout.mean_eta_sq)
        .field(t.readout.n_eff)
        .field(t.readout.p_eff)
        .field(t.shift_prep_hz)
        .field(t.shift_readout_hz);
    w.end_row();
  }
  return w.str();
}

inline std::string fig2_csv(const SweepResult& r) {
  CsvWriter w(schema("fig2"));
  for (const auto& p : r.fig2_points) {
    w.field(p.dt_ms).field(p.set_theta0).field(p.trials).field(p.mean_theta0)
        .field(p.sem_theta0).field(p.mean_theta_eff).field(p.sem_theta_eff);
    w.end_row();
  }
  return w.str();
}

inline std::string fig2_fit_csv(const SweepResult& r) {
  CsvWriter w(schema("fig2_fit"));
  for (const auto& f : r.fig2_fits) {
    w.field(f.dt_ms).field(f.fit.slope).field(f.fit.slope_ci68).field(f.fit.n)
        .field(f.fit.residual_variance);
    w.end_row();
  }
  return w.str();
}

inline std::string fig3a_csv(const SweepResult& r) {
  CsvWriter w(schema("fig3a"));
  for (const auto& row : r.rows) {
    w.field(row.dt_ms).field(row.reshape_ms).field(1.0 - row.p_eff).field(row.p_eff_sem)
        .field(row.mean_eta).field(row.mean_eta_sq).field(row.n_eff).field(row.n_eff_sem)
        .field(row.p_eff_css).field(row.p_eff_css_u);
    w.end_row();
  }
  return w.str();
}

inline std::string fig3b_csv(const SweepResult& r) {
  CsvWriter w(schema("fig3b"));
  for (const auto& row : r.rows) {
    w.field(row.dt_ms).field(row.p_eff).field(row.p_eff_sem).field(row.delta_theta_sq)
        .field(row.delta_theta_sq_u).field(row.angle_noise_theory);
    w.end_row();
  }
  return w.str();
}

inline std::string fig4a_csv(const SweepResult& r) {
  CsvWriter w(schema("fig4a"));
  for (const auto& row : r.rows) {
    w.field(row.dt_ms).field(row.coherence_ramsey).field(row.coherence_ramsey_u)
        .field(row.coherence);
    w.end_row();
  }
  return w.str();
}

inline std::string fig4b_csv(const SweepResult& r) {
  CsvWriter w(schema("fig4b"));
  for (const auto& row : r.rows) {
    const SqueezingReport& q = row.squeezing;
    w.field(row.dt_ms).field(q.xi_sq).field(q.xi_sq_ci68_low).field(q.xi_sq_ci68_high)
        .field(q.xi_db).field(row.delta_theta).field(row.delta_theta_u).field(row.n_eff);
    w.end_row();
  }
  return w.str();
}

/// Writes text with LF line endings exactly as given.
inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline void write_json(const std::string& path, const Json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Splits CSV text into rows of fields (no quoting is ever emitted).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace squeezesim::io
