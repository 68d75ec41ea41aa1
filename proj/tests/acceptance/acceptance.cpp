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

// Acceptance run: prints one PASS or FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [criterion ...]    (default: all of 1-9)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "squeezesim/io/commands.hpp"

namespace fs = std::filesystem;
namespace io = squeezesim::io;
namespace ss = squeezesim;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string config_path(const std::string& name) {
  return (fs::path(SQUEEZESIM_CONFIG_DIR) / name).string();
}

Outcome angle_noise_agreement() {
  Outcome o;
  Stopwatch clock;
  std::uint64_t index = 0;
  double worst = 1.0;
  for (double xi : {0.05, 1.0}) {
    for (double p : {0.0, 0.05, 0.1, 0.2, 0.4}) {
      const io::Check c = io::angle_noise_check(10000, p, xi, 300e-6, 300e-6, 5000, 3.0,
                                        ss::derive_seed(101, index++));
      if (std::abs(c.deviation - 1.0) > std::abs(worst - 1.0)) worst = c.deviation;
      o.require(c.passed, c.name + " ratio " + fmt("%.4f", c.deviation));
    }
  }
  const double t = clock.seconds();
  o.require(t < 60.0, fmt("runtime %.1f s exceeds 60 s", t));
  o.detail = fmt("worst var ratio %.4f", worst) + fmt(", %.1f s", t) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  Stopwatch clock;
  io::VerifySettings v;
  v.oracle_tolerance = 1e-12;
  v.surrogate_sigma_bound = 5.0;
  v.surrogate_draws = 1000000;
  const auto checks = io::oracle_suite(v, 77);
  double worst_abs = 0.0;
  double worst_sigma = 0.0;
  for (const auto& c : checks) {
    if (c.metric == "abs") worst_abs = std::max(worst_abs, c.deviation);
    if (c.metric == "sigma") worst_sigma = std::max(worst_sigma, c.deviation);
    o.require(c.passed, c.name);
  }
  const double t = clock.seconds();
  o.require(t < 30.0, fmt("runtime %.1f s exceeds 30 s", t));
  o.detail = std::to_string(checks.size()) + " checks, max closed-form deviation " +
             fmt("%.2e", worst_abs) + fmt(", max sampling deviation %.2f sigma", worst_sigma) +
             fmt(", %.1f s", t) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome back_to_back_numbers() {
  Outcome o;
  const ss::SqueezingReport w = ss::wineland(298e-6, 5e5, 0.96);
  o.require(std::abs(w.xi_db - (-13.2)) <= 0.3, "xi outside -13.2 +/- 0.3 dB");
  o.detail = fmt("xi^2 = %.3f dB", w.xi_db) + (o.passed ? "" : "; " + o.detail);
  return o;
}

Outcome angle_mean_equivalence() {
  Outcome o;
  Stopwatch clock;
  const io::RunConfig c = io::load_config(config_path("full_sweep.ini"));
  ss::SweepConfig cfg = c.sweep;
  cfg.options.threads = 0;
  const auto [points, fits] = ss::fig2_regression(cfg, c.physics);
  std::ostringstream d;
  for (const auto& f : fits) {
    const double dev = std::abs(f.fit.slope - 1.0);
    d << "dt " << f.dt_ms << ": " << fmt("%.4f", f.fit.slope) << " +/- "
      << fmt("%.4f", f.fit.slope_ci68) << "  ";
    o.require(dev <= 0.1, fmt("slope off by %.3f", dev));
    o.require(dev <= 3.0 * f.fit.slope_ci68, "slope outside its own 3 sigma interval");
    o.require(f.fit.intercept == 0.0, "intercept not fixed at zero");
  }
  d << fmt("(%.0f s)", clock.seconds());
  o.detail = d.str() + (o.passed ? "" : "; " + o.detail);
  return o;
}

Outcome thermal_kinematics() {
  Outcome o;
  ss::RngStream rng(5, 0, ss::RngStream::kCloud);
  const auto cloud = ss::sample_thermal_cloud(1000000, 25.0, 17.0, 150.0, rng);
  const ss::PhaseSpaceSummary s = ss::summarize(cloud);
  const double v = s.rms_vel.x;
  const double r = s.rms_pos.x;
  o.require(std::abs(v / 48.9 - 1.0) <= 0.02, "rms velocity");
  o.require(std::abs(s.rms_vel.y / 48.9 - 1.0) <= 0.02, "rms velocity (y)");
  o.require(std::abs(r / 17.0 - 1.0) <= 0.02, "rms radius");
  o.require(std::abs(s.rms_pos.y / 17.0 - 1.0) <= 0.02, "rms radius (y)");
  o.detail = fmt("v_rms = %.3f um/ms", v) + fmt(", r_rms = %.3f um", r) +
             (o.passed ? "" : "; " + o.detail);
  return o;
}

Outcome full_scale_sweep() {
  Outcome o;
  const io::RunConfig c = io::load_config(config_path("full_sweep.ini"));
  ss::SweepConfig cfg = c.sweep;
  cfg.fig2_times_ms.clear();  // the angle regression is criterion 4
  cfg.options.threads = 0;

  const double eta0 = ss::expected_coupling(c.physics.mode, c.physics.trapped_summary()).mean_eta();
  o.require(std::abs(eta0 - 0.9254) <= 1e-4, fmt("<eta>_e(0) = %.5f", eta0));

  Stopwatch clock;
  const ss::SweepResult r = ss::sweep_freefall(cfg, c.physics);
  const double t = clock.seconds();

  std::printf("  dt_ms  p_eff     dtheta^2      theory        z      xi_dB   model_dB  C_ramsey\n");
  const auto& rows = r.rows;
  for (const auto& row : rows) {
    const double z = (row.delta_theta_sq - row.angle_noise_theory) / row.delta_theta_sq_u;
    const double model_xi = row.angle_noise_theory * row.n_eff / (row.coherence * row.coherence);
    std::printf("  %5.2f  %.4f  %.5e  %.5e  %+6.2f  %+7.3f  %+7.3f   %.4f +/- %.4f\n",
                row.dt_ms, row.p_eff, row.delta_theta_sq, row.angle_noise_theory, z,
                row.squeezing.xi_db, 10.0 * std::log10(model_xi), row.coherence_ramsey,
                row.coherence_ramsey_u);
    o.require(std::abs(z) <= 3.0, fmt("dt %.2f: dtheta^2 off the closed form", row.dt_ms));
    o.require(row.coherence == 0.96, "configured coherence changed");
    o.require(std::abs(row.coherence_ramsey - 0.96) <= 3.0 * row.coherence_ramsey_u,
              fmt("dt %.2f: Ramsey coherence differs from 0.96", row.dt_ms));
  }

  // Monotone: no step down beyond 2 combined standard errors, and a
  // significant overall rise. Point estimates are reported alongside.
  bool strictly = true;
  const auto xi_u = [](const ss::SweepRow& row) {
    return 0.5 * (row.squeezing.xi_sq_ci68_high - row.squeezing.xi_sq_ci68_low);
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i - 1].squeezing.xi_sq;
    const double b = rows[i].squeezing.xi_sq;
    strictly = strictly && b > a;
    const double u = std::hypot(xi_u(rows[i - 1]), xi_u(rows[i]));
    o.require(b >= a - 2.0 * u, fmt("xi^2 decreases significantly after dt %.2f", rows[i - 1].dt_ms));
  }
  const double rise = rows.back().squeezing.xi_sq - rows.front().squeezing.xi_sq;
  o.require(rise > 3.0 * std::hypot(xi_u(rows.front()), xi_u(rows.back())),
            "no significant overall rise of xi^2");
  o.require(rows.front().squeezing.xi_db < 0.0, "no squeezing at the first time");
  o.require(rows.back().squeezing.xi_db >= 0.0,
            "xi^2 does not cross 0 dB within the configured times");

  o.require(t < 600.0, fmt("sweep took %.0f s, limit 600 s", t));
  o.detail = fmt("sweep %.0f s", t) + (strictly ? ", xi^2 point estimates strictly increasing"
                                                : ", xi^2 point estimates not strictly increasing") +
             fmt(", xi^2 at max dt %+.3f dB", rows.back().squeezing.xi_db) +
             (o.passed ? "" : "; " + o.detail);
  return o;
}

Outcome bootstrap_validity() {
  Outcome o;
  const double expected = 1.0 / std::sqrt(2.0 * 699.0);
  std::ostringstream d;
  d << fmt("expected %.5f:", expected);
  for (std::uint64_t fixture = 0; fixture < 3; ++fixture) {
    ss::RngStream data(700 + fixture, 0, ss::RngStream::kGeneral);
    std::vector<double> x(700);
    for (auto& v : x) v = 2.5 * data.normal() + 1.0;
    ss::RngStream rng(700 + fixture, 1, ss::RngStream::kBootstrap);
    const auto b = ss::stats::bootstrap_std(x, rng, 10000);
    const double rel = b.std_error / b.point_estimate;
    d << fmt(" %.5f", rel);
    o.require(std::abs(rel / expected - 1.0) <= 0.10,
              "fixture " + std::to_string(fixture) + fmt(" relative error %.5f", rel));
  }
  o.detail = d.str() + (o.passed ? "" : "; " + o.detail);
  return o;
}

Outcome protocol_fidelity() {
  Outcome o;
  ss::PhysicsConfig ph;
  ph.mode = ss::calibrate_geometry(ph.trapped_summary(), 0.9254, 0.2).mode;
  const ss::ProbePair probes{ss::ProbeConfig::from_angle_variance(6e-8, 0.6),
                             ss::ProbeConfig::from_angle_variance(3e-8, 1.0)};
  const std::pair<const char*, const char*> table[] = {
      {"0.8", "0.4"}, {"0.7", "0.7"}, {"0.6", "1.2"}, {"0.5", "1.4"}, {"0.5", "2"},
      {"0.5", "3"},   {"0.5", "4"},   {"0.5", "5"},   {"0.5", "6"},   {"0.5", "7"}};
  const auto& rows = ss::delta_kick_table();
  o.require(rows.size() == 10, "timing table does not have 10 rows");
  for (std::size_t i = 0; i < rows.size() && i < 10; ++i) {
    const auto p = ss::delta_kick_protocol(rows[i].dt_prime_ms, rows[i].dt_ms, 0.0, probes,
                                           ss::HoldPolicy::recompress(), ph);
    const std::string text = ss::serialize(p);
    const std::string reshape = std::string("reshape_ms ") + table[i].first + "\n";
    const std::string fall = std::string("free_fall_ms ") + table[i].second + "\n";
    const std::string first = std::string("step lattice_off ") + table[i].first + "\n";
    const std::string second = std::string("step lattice_off ") + table[i].second + "\n";
    o.require(text.find(reshape) != std::string::npos, "row " + std::to_string(i) + " reshape");
    o.require(text.find(fall) != std::string::npos, "row " + std::to_string(i) + " free fall");
    const auto a = text.find(first);
    const auto b = text.find(second, a == std::string::npos ? 0 : a + first.size());
    const auto pi_half = text.find("step mw_pi_half");
    const auto rotation = text.find("step mw_small_rotation");
    o.require(a != std::string::npos && b != std::string::npos && a < pi_half &&
                  rotation < b,
              "row " + std::to_string(i) + " step order");
  }
  const auto rr = ss::release_recapture_protocol(0.0, 0.0, probes, ss::HoldPolicy::recompress(), ph);
  const std::string text = ss::serialize(rr);
  o.require(text.find("lattice_off") == std::string::npos,
            "back-to-back release-recapture contains a release");
  o.require(rr.free_fall_ms == 0.0, "back-to-back free fall nonzero");
  o.detail = "10 timing rows, back-to-back without release";
  return o;
}

std::vector<std::pair<std::string, std::string>> read_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    files.emplace_back(e.path().filename().string(), io::read_file(e.path().string()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  Outcome o;
  const std::string base =
      "[run]\nschema = 1\natoms = 20000\ntrials = 100\nseed = 9\n"
      "[cavity]\ncalibrate = true\nlongitudinal_share = 0.2\n"
      "[protocol]\nkind = rr\ndt_ms = 1.4\nhold = fixed\nhold_ms = 0\n"
      "[sweep]\ntimes_ms = 0, 1, 2\nfig2_times_ms = 1\nfig2_theta0_mrad = -2, 2\n"
      "fig2_trials = 50\nbootstrap_resamples = 500\n"
      "[calibrate]\ntimes_ms = 0, 1\natom_counts = 5000, 10000, 20000\nclouds = 2\n"
      "shift_noise_hz = 50\n"
      "[verify]\natoms = 1000\ntrials = 300\nsurrogate_draws = 2000\n";
  const fs::path root = fs::temp_directory_path() / "squeezesim_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  const std::vector<std::pair<std::string, std::function<int(const io::RunConfig&,
                                                            const std::string&)>>>
      commands{
          {"simulate", [&](const io::RunConfig& c, const std::string& d) {
             return io::cmd_simulate(c, d, sink);
           }},
          {"sweep", [&](const io::RunConfig& c, const std::string& d) {
             return io::cmd_sweep(c, d, sink);
           }},
          {"calibrate", [&](const io::RunConfig& c, const std::string& d) {
             return io::cmd_calibrate(c, d, sink);
           }},
          {"verify", [&](const io::RunConfig& c, const std::string& d) {
             return io::cmd_verify(c, "all", d, sink);
           }},
      };
  std::size_t compared = 0;
  for (const auto& [name, run] : commands) {
    std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
    for (std::size_t threads : {1, 3}) {
      io::RunConfig c = io::parse_config(base, "determinism.ini");
      c.threads = threads;
      io::finalize(c);
      const fs::path dir = root / (name + std::to_string(threads));
      const int status = run(c, dir.string());
      o.require(status == io::kExitOk, name + " exited with " + std::to_string(status));
      outputs.push_back(read_tree(dir));
    }
    o.require(!outputs[0].empty() && outputs[0] == outputs[1], name + " outputs differ");
    compared += outputs[0].size();
  }
  fs::remove_all(root);
  o.detail = std::to_string(compared) + " files byte-identical across re-runs" +
             (o.passed ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"angle-noise Monte Carlo agreement", angle_noise_agreement},
      {"exact oracle equivalence", oracle_equivalence},
      {"back-to-back reference numbers", back_to_back_numbers},
      {"angle-mean equivalence", angle_mean_equivalence},
      {"thermal kinematics", thermal_kinematics},
      {"full-scale sweep", full_scale_sweep},
      {"bootstrap validity", bootstrap_validity},
      {"protocol fidelity", protocol_fidelity},
      {"determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  bool all_passed = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!wanted.empty() && wanted.count(number) == 0) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all_passed = all_passed && o.passed;
    std::printf("%s %d %s: %s\n", o.passed ? "PASS" : "FAIL", number, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all_passed ? 0 : 1;
}
