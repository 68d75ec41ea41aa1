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

/// The four command-line operations. Each writes its files under out_dir,
/// prints a short human-readable summary to the given stream and returns
/// the process exit status.

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "squeezesim/io/calibrate.hpp"
#include "squeezesim/io/config.hpp"
#include "squeezesim/io/results.hpp"
#include "squeezesim/io/verify.hpp"
#include "squeezesim/protocols.hpp"

namespace squeezesim::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

inline std::filesystem::path prepare_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline int cmd_simulate(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const auto dir = prepare_out_dir(out_dir);
  const Protocol protocol = make_protocol(c);
  ExperimentOptions opt = c.sweep.options;
  opt.threads = c.threads;
  const ExperimentResult r = run_experiment(protocol, c.physics, c.trials, c.seed, opt);

  Json doc = document("simulate", c);
  doc["protocol"] = protocol_json(protocol);
  doc["result"] = experiment_json(r);
  write_json((dir / "result.json").string(), doc);
  write_file((dir / "trials.csv").string(), trials_csv(r.trials));

  log << std::setprecision(4);
  log << protocol.label << ", " << r.n_trials() << " trials, N = " << c.physics.atoms << '\n';
  log << "  delta_theta = " << r.delta_theta * 1e6 << " +/- "
      << r.delta_theta_bootstrap.std_error * 1e6 << " urad\n";
  log << "  p_eff = " << r.p_eff << "  N_eff = " << r.n_eff << "  C = " << r.coherence << '\n';
  log << "  xi^2 = " << r.squeezing.xi_sq << " (" << r.squeezing.xi_db << " dB)\n";
  return kExitOk;
}

inline int cmd_sweep(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const auto dir = prepare_out_dir(out_dir);
  const SweepResult r = sweep_freefall(c.sweep, c.physics);
  Json doc = document("sweep", c);
  doc["result"] = sweep_json(r);
  write_json((dir / "sweep.json").string(), doc);
  write_file((dir / "fig2.csv").string(), fig2_csv(r));
  write_file((dir / "fig2_fit.csv").string(), fig2_fit_csv(r));
  write_file((dir / "fig3a.csv").string(), fig3a_csv(r));
  write_file((dir / "fig3b.csv").string(), fig3b_csv(r));
  write_file((dir / "fig4a.csv").string(), fig4a_csv(r));
  write_file((dir / "fig4b.csv").string(), fig4b_csv(r));

  log << std::setprecision(4);
  log << "dt_ms  p_eff  dtheta_urad  xi_db  C_ramsey\n";
  for (const auto& row : r.rows) {
    log << row.dt_ms << "  " << row.p_eff << "  " << row.delta_theta * 1e6 << "  "
        << row.squeezing.xi_db << "  " << row.coherence_ramsey << '\n';
  }
  for (const auto& f : r.fig2_fits) {
    log << "fig2 dt = " << f.dt_ms << " ms: slope " << f.fit.slope << " +/- "
        << f.fit.slope_ci68 << '\n';
  }
  return kExitOk;
}

inline int cmd_calibrate(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const auto dir = prepare_out_dir(out_dir);
  const CalibrationReport r = run_calibration(c);
  Json doc = document("calibrate", c);
  doc["result"] = calibration_json(r);
  write_json((dir / "calibration.json").string(), doc);
  write_file((dir / "calibration.csv").string(), calibration_csv(r));
  write_file((dir / "geometry.ini").string(), geometry_ini(r));

  log << std::setprecision(6);
  log << "waist_um = " << r.mode.waist_um << "  delta_k = " << r.mode.delta_k
      << "  <eta>_e(0) = " << r.expected.mean_eta() << " (sampled "
      << r.sampled_mean_eta << ")\n";
  for (const auto& row : r.rows) {
    log << "  dt = " << row.dt_ms << " ms: <eta>_e = " << row.fit.mean_eta << " +/- "
        << row.fit.mean_eta_ci68 << " (geometric " << row.mean_eta_geometric << ")\n";
  }
  return kExitOk;
}

/// suite is one of oracle, analytic, schema or all.
inline int cmd_verify(const RunConfig& c, const std::string& suite,
                      const std::string& out_dir, std::ostream& log) {
  const auto dir = prepare_out_dir(out_dir);
  std::vector<Check> checks;
  const auto add = [&](std::vector<Check> more) {
    checks.insert(checks.end(), more.begin(), more.end());
  };
  if (suite == "oracle" || suite == "all") add(oracle_suite(c.verify, c.seed));
  if (suite == "analytic" || suite == "all") add(analytic_suite(c.verify, c.seed, c.threads));
  if (suite == "schema" || suite == "all") add(schema_suite(c.verify));

  bool ok = true;
  log << std::setprecision(4);
  for (const auto& ch : checks) {
    ok = ok && ch.passed;
    log << (ch.passed ? "PASS " : "FAIL ") << ch.name << "  " << ch.metric
        << " deviation = " << ch.deviation << " (bound " << ch.bound << ")\n";
  }
  Json doc = document("verify", c);
  doc["suite"] = suite;
  doc["passed"] = ok;
  doc["checks"] = checks_json(checks);
  write_json((dir / "verify.json").string(), doc);
  log << (ok ? "all checks passed" : "verification FAILED") << '\n';
  return ok ? kExitOk : kExitFailure;
}

}  // namespace squeezesim::io
