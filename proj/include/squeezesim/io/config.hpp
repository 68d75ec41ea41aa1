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

/// INI run configuration.
///
/// Sections and keys are fixed by schema version 1; anything unknown is an
/// error, as is a missing required key. Errors carry the offending key and,
/// when it appears in the file, its line number.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "squeezesim/constants.hpp"
#include "squeezesim/coupling.hpp"
#include "squeezesim/ensemble.hpp"
#include "squeezesim/measurement.hpp"
#include "squeezesim/io/csv_schema.hpp"
#include "squeezesim/protocols.hpp"

namespace squeezesim::io {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& key, int line,
              const std::string& what)
      : std::runtime_error(format(where, key, line, what)), key_(key), line_(line) {}

  [[nodiscard]] const std::string& key() const noexcept { return key_; }
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& where, const std::string& key,
                            int line, const std::string& what) {
    std::string s = where;
    if (line > 0) s += ":" + std::to_string(line);
    if (!key.empty()) s += ": " + key;
    return s + ": " + what;
  }

  std::string key_;
  int line_ = 0;
};

/// Geometry calibration requested by the [cavity] section.
struct CalibrationSettings {
  bool enabled = false;
  double target_mean_eta = constants::kReferenceMeanEta;
  double longitudinal_share = 0.0;
};

struct ProtocolSettings {
  ProtocolKind kind = ProtocolKind::kReleaseRecapture;
  double dt_ms = 0.0;
  double reshape_ms = 0.5;
  double epsilon = 0.0;
  HoldPolicy hold;
  std::optional<double> kick_hold_ms;
};

struct CalibrateSettings {
  std::vector<double> times_ms{0.0, 0.5, 1.0, 2.0, 3.0};
  std::vector<double> atom_counts{1e5, 2e5, 3e5, 4e5, 5e5};
  double shift_cap_hz = 900e3;
  std::size_t clouds = 4;
  double shift_noise_hz = 0.0;
};

struct VerifySettings {
  std::size_t atoms = 10000;
  std::size_t trials = 5000;
  double sigma_bound = 3.0;
  double oracle_tolerance = 1e-12;
  double surrogate_sigma_bound = 5.0;
  std::size_t surrogate_draws = 1000000;
  /// Expected "version|header" per CSV name, from the [schemas] section.
  std::map<std::string, std::string> pinned_schemas;
};

struct RunConfig {
  std::string source;  // file name for diagnostics
  int schema_version = kConfigSchemaVersion;
  std::size_t trials = 700;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  PhysicsConfig physics;
  double lattice_waist_um = 170.0;
  double sigma_total = 298e-6;
  double prep_share = 2.0 / 3.0;
  ProbePair probes;
  CalibrationSettings calibration;
  std::optional<GeometryCalibration> geometry;
  ProtocolSettings protocol;
  SweepConfig sweep;
  CalibrateSettings calibrate;
  VerifySettings verify;
};

namespace detail {

enum class Need { kOptional, kRequired };

struct KeySpec {
  const char* section;
  const char* key;
  Need need;
};

inline const std::vector<KeySpec>& schema_keys() {
  static const std::vector<KeySpec> keys{
      {"run", "schema", Need::kRequired},
      {"run", "atoms", Need::kRequired},
      {"run", "trials", Need::kRequired},
      {"run", "seed", Need::kRequired},
      {"run", "threads", Need::kOptional},
      {"cloud", "temperature_uK", Need::kOptional},
      {"cloud", "rms_transverse_um", Need::kOptional},
      {"cloud", "rms_longitudinal_um", Need::kOptional},
      {"trap", "depth_uK", Need::kOptional},
      {"trap", "lattice_waist_um", Need::kOptional},
      {"trap", "transverse_omega", Need::kOptional},
      {"trap", "longitudinal_omega", Need::kOptional},
      {"trap", "lattice_wavelength_nm", Need::kOptional},
      {"trap", "switching_time_us", Need::kOptional},
      {"gravity", "magnitude", Need::kOptional},
      {"gravity", "direction", Need::kOptional},
      {"cavity", "waist_um", Need::kOptional},
      {"cavity", "delta_k", Need::kOptional},
      {"cavity", "probe_wavelength_nm", Need::kOptional},
      {"cavity", "homogeneous", Need::kOptional},
      {"cavity", "calibrate", Need::kOptional},
      {"cavity", "target_mean_eta", Need::kOptional},
      {"cavity", "longitudinal_share", Need::kOptional},
      {"cavity", "delta_0_hz", Need::kOptional},
      {"cavity", "readout_regime", Need::kOptional},
      {"spin", "xi_sq_in", Need::kOptional},
      {"spin", "tilt", Need::kOptional},
      {"spin", "coherence", Need::kOptional},
      {"spin", "mode", Need::kOptional},
      {"probes", "sigma_total_urad", Need::kOptional},
      {"probes", "prep_share", Need::kOptional},
      {"probes", "discriminator", Need::kOptional},
      {"probes", "prep_quadrature_var", Need::kOptional},
      {"probes", "readout_quadrature_var", Need::kOptional},
      {"probes", "prep_strength", Need::kOptional},
      {"probes", "readout_strength", Need::kOptional},
      {"protocol", "kind", Need::kOptional},
      {"protocol", "dt_ms", Need::kOptional},
      {"protocol", "reshape_ms", Need::kOptional},
      {"protocol", "epsilon", Need::kOptional},
      {"protocol", "hold", Need::kOptional},
      {"protocol", "hold_ms", Need::kOptional},
      {"protocol", "kick_hold_ms", Need::kOptional},
      {"protocol", "extra_segment_contrast", Need::kOptional},
      {"sweep", "times_ms", Need::kOptional},
      {"sweep", "reshape_ms", Need::kOptional},
      {"sweep", "ramsey_points", Need::kOptional},
      {"sweep", "ramsey_half_width", Need::kOptional},
      {"sweep", "ramsey_noise", Need::kOptional},
      {"sweep", "css_estimate", Need::kOptional},
      {"sweep", "fig2_times_ms", Need::kOptional},
      {"sweep", "fig2_theta0_mrad", Need::kOptional},
      {"sweep", "fig2_trials", Need::kOptional},
      {"sweep", "fig2_atoms", Need::kOptional},
      {"sweep", "bootstrap_resamples", Need::kOptional},
      {"calibrate", "times_ms", Need::kOptional},
      {"calibrate", "atom_counts", Need::kOptional},
      {"calibrate", "shift_cap_khz", Need::kOptional},
      {"calibrate", "clouds", Need::kOptional},
      {"calibrate", "shift_noise_hz", Need::kOptional},
      {"verify", "atoms", Need::kOptional},
      {"verify", "trials", Need::kOptional},
      {"verify", "sigma_bound", Need::kOptional},
      {"verify", "oracle_tolerance", Need::kOptional},
      {"verify", "surrogate_sigma_bound", Need::kOptional},
      {"verify", "surrogate_draws", Need::kOptional},
  };
  return keys;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Line of section.key in the raw text, or 0 when absent.
inline int locate(const std::string& text, const std::string& section,
                  const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      if (key.empty() && current == section) return number;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) {
      return number;
    }
  }
  return 0;
}

class Reader {
 public:
  Reader(std::string source, std::string text, boost::property_tree::ptree tree)
      : source_(std::move(source)), text_(std::move(text)), tree_(std::move(tree)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    throw ConfigError(source_, section + "." + key, locate(text_, section, key), what);
  }

  /// Raw values are kept verbatim apart from surrounding blanks and quotes.
  [[nodiscard]] std::optional<std::string> raw(const std::string& section,
                                                const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    std::string t = trim(*v);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
  }

  [[nodiscard]] double number(const std::string& section, const std::string& key,
                              double fallback) const {
    const auto v = raw(section, key);
    return v ? parse_double(section, key, *v) : fallback;
  }

  template <typename Int>
  [[nodiscard]] Int integer(const std::string& section, const std::string& key,
                            Int fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    Int out{};
    const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec == std::errc{} && end == v->data() + v->size()) return out;
    // Accept integral values written in floating-point notation (5e5).
    const double d = parse_double(section, key, *v);
    if (d >= 0.0 && d == static_cast<double>(static_cast<Int>(d))) {
      return static_cast<Int>(d);
    }
    fail(section, key, "expected a nonnegative integer, got '" + *v + "'");
  }

  [[nodiscard]] bool boolean(const std::string& section, const std::string& key,
                             bool fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(section, key, "expected true or false, got '" + *v + "'");
  }

  [[nodiscard]] std::string word(const std::string& section, const std::string& key,
                                 const std::string& fallback,
                                 const std::set<std::string>& allowed) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (allowed.count(*v) == 0) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(section, key, "expected one of {" + list + "}, got '" + *v + "'");
    }
    return *v;
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& section,
                                            const std::string& key,
                                            const std::vector<double>& fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) fail(section, key, "empty list entry");
      out.push_back(parse_double(section, key, t));
    }
    return out;
  }

  void check_keys() const {
    std::set<std::pair<std::string, std::string>> known;
    std::set<std::string> sections;
    for (const auto& k : schema_keys()) {
      known.emplace(k.section, k.key);
      sections.insert(k.section);
    }
    for (const auto& s : csv_schemas()) known.emplace("schemas", s.name);
    sections.insert("schemas");
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(source_, section, locate(text_, "", section),
                          "key outside any section");
      }
      if (sections.count(section) == 0) {
        throw ConfigError(source_, "[" + section + "]", locate(text_, section, ""),
                          "unknown section");
      }
      for (const auto& [key, value] : body) {
        if (known.count({section, key}) == 0) fail(section, key, "unknown key");
      }
    }
    for (const auto& k : schema_keys()) {
      if (k.need == Need::kRequired && !raw(k.section, k.key)) {
        throw ConfigError(source_, std::string(k.section) + "." + k.key, 0,
                          "missing required key");
      }
    }
  }

 private:
  double parse_double(const std::string& section, const std::string& key,
                      const std::string& v) const {
    double out = 0.0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size()) {
      fail(section, key, "expected a number, got '" + v + "'");
    }
    return out;
  }

  std::string source_;
  std::string text_;
  boost::property_tree::ptree tree_;
};

inline ProbePair make_probes(const RunConfig& c, double discriminator,
                             double prep_quad, double readout_quad,
                             double prep_strength, double readout_strength) {
  const double total = c.sigma_total * c.sigma_total;
  ProbePair p;
  p.preparation = ProbeConfig::from_angle_variance(total * c.prep_share, prep_strength);
  p.readout =
      ProbeConfig::from_angle_variance(total * (1.0 - c.prep_share), readout_strength);
  p.preparation.discriminator = p.readout.discriminator = discriminator;
  p.preparation.quadrature_noise_var = prep_quad;
  p.readout.quadrature_noise_var = readout_quad;
  return p;
}

}  // namespace detail

/// Propagates run-level settings (after command-line overrides) into the
/// sweep block.
inline void finalize(RunConfig& c) {
  c.sweep.trials = c.trials;
  c.sweep.seed = c.seed;
  c.sweep.options.threads = c.threads;
  if (c.sweep.fig2_trials == 0) c.sweep.fig2_trials = c.trials;
}

/// Parses configuration text. source names the text in diagnostics.
inline RunConfig parse_config(const std::string& text,
                              const std::string& source = "<config>") {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source, "", static_cast<int>(e.line()), e.message());
  }
  const detail::Reader r(source, text, tree);
  r.check_keys();

  RunConfig c;
  c.source = source;
  c.schema_version = r.integer<int>("run", "schema", 0);
  if (c.schema_version != kConfigSchemaVersion) {
    r.fail("run", "schema",
           "unsupported schema version " + std::to_string(c.schema_version) +
               " (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  PhysicsConfig& ph = c.physics;
  ph.atoms = r.integer<std::size_t>("run", "atoms", ph.atoms);
  c.trials = r.integer<std::size_t>("run", "trials", c.trials);
  c.seed = r.integer<std::uint64_t>("run", "seed", c.seed);
  c.threads = r.integer<std::size_t>("run", "threads", c.threads);
  if (ph.atoms < 2) r.fail("run", "atoms", "need at least two atoms");
  if (c.trials < 2) r.fail("run", "trials", "need at least two trials");

  ph.temperature_uK = r.number("cloud", "temperature_uK", ph.temperature_uK);
  ph.rms_radius_transverse_um =
      r.number("cloud", "rms_transverse_um", ph.rms_radius_transverse_um);
  ph.rms_radius_longitudinal_um =
      r.number("cloud", "rms_longitudinal_um", ph.rms_radius_longitudinal_um);
  if (!(ph.temperature_uK > 0.0)) r.fail("cloud", "temperature_uK", "must be positive");
  if (!(ph.rms_radius_transverse_um > 0.0)) {
    r.fail("cloud", "rms_transverse_um", "must be positive");
  }
  if (!(ph.rms_radius_longitudinal_um > 0.0)) {
    r.fail("cloud", "rms_longitudinal_um", "must be positive");
  }

  TrapConfig& trap = ph.trap;
  trap.depth_uK = r.number("trap", "depth_uK", trap.depth_uK);
  c.lattice_waist_um = r.number("trap", "lattice_waist_um", c.lattice_waist_um);
  if (!(trap.depth_uK > 0.0)) r.fail("trap", "depth_uK", "must be positive");
  if (!(c.lattice_waist_um > 0.0)) r.fail("trap", "lattice_waist_um", "must be positive");
  trap.transverse_omega = r.number(
      "trap", "transverse_omega", gaussian_trap_omega(trap.depth_uK, c.lattice_waist_um));
  trap.longitudinal_omega = r.number("trap", "longitudinal_omega", trap.longitudinal_omega);
  trap.lattice_wavelength_nm =
      r.number("trap", "lattice_wavelength_nm", trap.lattice_wavelength_nm);
  trap.switching_time_us = r.number("trap", "switching_time_us", trap.switching_time_us);
  if (!(trap.transverse_omega > 0.0)) r.fail("trap", "transverse_omega", "must be positive");
  if (!(trap.longitudinal_omega > 0.0)) {
    r.fail("trap", "longitudinal_omega", "must be positive");
  }

  const double g = r.number("gravity", "magnitude", constants::kGravity);
  const auto dir = r.numbers("gravity", "direction", {0.0, -1.0, 0.0});
  if (dir.size() != 3) r.fail("gravity", "direction", "expected three components");
  if (g < 0.0) r.fail("gravity", "magnitude", "must be nonnegative");
  if (dir[0] == 0.0 && dir[1] == 0.0 && dir[2] == 0.0) {
    r.fail("gravity", "direction", "must be nonzero");
  }
  ph.gravity = GravityConfig::along({dir[0], dir[1], dir[2]}, g);

  CavityMode& mode = ph.mode;
  mode.waist_um = r.number("cavity", "waist_um", mode.waist_um);
  mode.delta_k = r.number("cavity", "delta_k", mode.delta_k);
  mode.probe_wavelength_nm = r.number("cavity", "probe_wavelength_nm", mode.probe_wavelength_nm);
  mode.lattice_wavelength_nm = trap.lattice_wavelength_nm;
  if (!(mode.waist_um > 0.0)) r.fail("cavity", "waist_um", "must be positive");
  if (!(mode.delta_k >= 0.0)) r.fail("cavity", "delta_k", "must be nonnegative");
  const bool homogeneous = r.boolean("cavity", "homogeneous", false);
  c.calibration.enabled = r.boolean("cavity", "calibrate", false);
  c.calibration.target_mean_eta =
      r.number("cavity", "target_mean_eta", c.calibration.target_mean_eta);
  c.calibration.longitudinal_share =
      r.number("cavity", "longitudinal_share", c.calibration.longitudinal_share);
  if (homogeneous) {
    mode.waist_um = std::numeric_limits<double>::infinity();
    mode.delta_k = 0.0;
  } else if (c.calibration.enabled) {
    try {
      c.geometry = calibrate_geometry(ph.trapped_summary(), c.calibration.target_mean_eta,
                                      c.calibration.longitudinal_share, mode);
    } catch (const std::exception& e) {
      r.fail("cavity", "calibrate", e.what());
    }
    mode = c.geometry->mode;
  }
  ph.delta_0 = r.number("cavity", "delta_0_hz", ph.delta_0);
  ph.readout_regime = r.word("cavity", "readout_regime", "pinned", {"pinned", "free"}) == "free"
                          ? LongitudinalRegime::kFree
                          : LongitudinalRegime::kPinned;

  ph.xi_sq_in = r.number("spin", "xi_sq_in", ph.xi_sq_in);
  ph.tilt = r.number("spin", "tilt", ph.tilt);
  ph.coherence = r.number("spin", "coherence", ph.coherence);
  ph.spin_mode = r.word("spin", "mode", "surrogate", {"surrogate", "exact"}) == "exact"
                     ? SpinMode::kExact
                     : SpinMode::kSurrogate;
  const double n = static_cast<double>(ph.atoms);
  if (!(ph.xi_sq_in > 1.0 / n && ph.xi_sq_in < n)) {
    r.fail("spin", "xi_sq_in", "must lie in (1/N, N)");
  }
  if (!(std::abs(ph.tilt) <= kMaxSmallAngle)) r.fail("spin", "tilt", "must satisfy |tilt| <= 0.1");
  if (!(ph.coherence > 0.0 && ph.coherence <= 1.0)) {
    r.fail("spin", "coherence", "must lie in (0, 1]");
  }

  c.sigma_total = r.number("probes", "sigma_total_urad", c.sigma_total * 1e6) * 1e-6;
  c.prep_share = r.number("probes", "prep_share", c.prep_share);
  const double discriminator = r.number("probes", "discriminator", 1.0);
  const double prep_quad = r.number("probes", "prep_quadrature_var", 0.0);
  const double readout_quad = r.number("probes", "readout_quadrature_var", 0.0);
  const double prep_strength = r.number("probes", "prep_strength", 0.6);
  const double readout_strength = r.number("probes", "readout_strength", 1.0);
  if (!(c.sigma_total >= 0.0)) r.fail("probes", "sigma_total_urad", "must be nonnegative");
  if (!(c.prep_share >= 0.0 && c.prep_share <= 1.0)) {
    r.fail("probes", "prep_share", "must lie in [0, 1]");
  }
  if (!(discriminator > 0.0)) r.fail("probes", "discriminator", "must be positive");
  if (!(prep_quad >= 0.0)) r.fail("probes", "prep_quadrature_var", "must be nonnegative");
  if (!(readout_quad >= 0.0)) {
    r.fail("probes", "readout_quadrature_var", "must be nonnegative");
  }
  c.probes = detail::make_probes(c, discriminator, prep_quad, readout_quad,
                                 prep_strength, readout_strength);

  ProtocolSettings& p = c.protocol;
  p.kind = r.word("protocol", "kind", "rr", {"rr", "dk"}) == "dk"
               ? ProtocolKind::kDeltaKick
               : ProtocolKind::kReleaseRecapture;
  p.dt_ms = r.number("protocol", "dt_ms", p.dt_ms);
  p.reshape_ms = r.number("protocol", "reshape_ms", p.reshape_ms);
  p.epsilon = r.number("protocol", "epsilon", p.epsilon);
  const bool fixed =
      r.word("protocol", "hold", "recompress", {"recompress", "fixed"}) == "fixed";
  const double hold_ms = r.number("protocol", "hold_ms", 0.0);
  if (!(hold_ms >= 0.0)) r.fail("protocol", "hold_ms", "must be nonnegative");
  p.hold = fixed ? HoldPolicy::fixed(hold_ms) : HoldPolicy::recompress();
  if (r.raw("protocol", "kick_hold_ms")) {
    p.kick_hold_ms = r.number("protocol", "kick_hold_ms", 0.0);
    if (!(*p.kick_hold_ms >= 0.0)) r.fail("protocol", "kick_hold_ms", "must be nonnegative");
  }
  ph.extra_segment_contrast = r.number("protocol", "extra_segment_contrast",
                                       p.kind == ProtocolKind::kDeltaKick ? 0.975 : 1.0);
  if (!(p.dt_ms >= 0.0)) r.fail("protocol", "dt_ms", "must be nonnegative");
  if (!(p.reshape_ms >= 0.0)) r.fail("protocol", "reshape_ms", "must be nonnegative");
  if (!(std::abs(p.epsilon) <= kMaxSmallAngle)) {
    r.fail("protocol", "epsilon", "must satisfy |epsilon| <= 0.1");
  }
  if (!(ph.extra_segment_contrast > 0.0 && ph.extra_segment_contrast <= 1.0)) {
    r.fail("protocol", "extra_segment_contrast", "must lie in (0, 1]");
  }

  SweepConfig& s = c.sweep;
  s.times_ms = r.numbers("sweep", "times_ms", {0.0, 0.7, 1.0, 2.0, 3.0});
  s.kind = p.kind;
  s.reshape_ms = r.numbers("sweep", "reshape_ms", {});
  s.epsilon = p.epsilon;
  s.probes = c.probes;
  s.hold = p.hold;
  s.ramsey_points = r.integer<std::size_t>("sweep", "ramsey_points", s.ramsey_points);
  s.ramsey_half_width = r.number("sweep", "ramsey_half_width", s.ramsey_half_width);
  s.ramsey_noise = r.number("sweep", "ramsey_noise", s.ramsey_noise);
  s.css_estimate = r.boolean("sweep", "css_estimate", s.css_estimate);
  s.fig2_times_ms = r.numbers("sweep", "fig2_times_ms", {});
  s.fig2_theta0.clear();
  for (double mrad : r.numbers("sweep", "fig2_theta0_mrad", {-3, -2, -1, 1, 2, 3})) {
    s.fig2_theta0.push_back(mrad * 1e-3);
  }
  s.fig2_trials = r.integer<std::size_t>("sweep", "fig2_trials", 0);
  s.fig2_atoms = r.integer<std::size_t>("sweep", "fig2_atoms", 0);
  s.options.bootstrap_resamples =
      r.integer<std::size_t>("sweep", "bootstrap_resamples", s.options.bootstrap_resamples);
  if (s.times_ms.empty()) r.fail("sweep", "times_ms", "needs at least one time");
  for (double t : s.times_ms) {
    if (!(t >= 0.0)) r.fail("sweep", "times_ms", "times must be nonnegative");
  }
  if (!s.reshape_ms.empty() && s.reshape_ms.size() != s.times_ms.size()) {
    r.fail("sweep", "reshape_ms", "needs one entry per free-fall time");
  }
  if (s.ramsey_points < 5) r.fail("sweep", "ramsey_points", "needs at least 5 points");
  if (!(s.ramsey_half_width > 0.0)) r.fail("sweep", "ramsey_half_width", "must be positive");
  if (!(s.ramsey_noise >= 0.0)) r.fail("sweep", "ramsey_noise", "must be nonnegative");
  for (double t : s.fig2_theta0) {
    if (!(std::abs(t) <= kMaxSmallAngle)) {
      r.fail("sweep", "fig2_theta0_mrad", "set points must satisfy |theta| <= 100 mrad");
    }
  }

  CalibrateSettings& cal = c.calibrate;
  cal.times_ms = r.numbers("calibrate", "times_ms", cal.times_ms);
  cal.atom_counts = r.numbers("calibrate", "atom_counts", cal.atom_counts);
  cal.shift_cap_hz = r.number("calibrate", "shift_cap_khz", cal.shift_cap_hz * 1e-3) * 1e3;
  cal.clouds = r.integer<std::size_t>("calibrate", "clouds", cal.clouds);
  cal.shift_noise_hz = r.number("calibrate", "shift_noise_hz", cal.shift_noise_hz);
  if (cal.times_ms.empty()) r.fail("calibrate", "times_ms", "needs at least one time");
  if (cal.atom_counts.size() < 3) r.fail("calibrate", "atom_counts", "needs at least three counts");
  for (double a : cal.atom_counts) {
    if (!(a >= 1.0)) r.fail("calibrate", "atom_counts", "counts must be at least 1");
  }
  if (cal.clouds < 1) r.fail("calibrate", "clouds", "needs at least one cloud");

  VerifySettings& v = c.verify;
  v.atoms = r.integer<std::size_t>("verify", "atoms", v.atoms);
  v.trials = r.integer<std::size_t>("verify", "trials", v.trials);
  v.sigma_bound = r.number("verify", "sigma_bound", v.sigma_bound);
  v.oracle_tolerance = r.number("verify", "oracle_tolerance", v.oracle_tolerance);
  v.surrogate_sigma_bound =
      r.number("verify", "surrogate_sigma_bound", v.surrogate_sigma_bound);
  v.surrogate_draws = r.integer<std::size_t>("verify", "surrogate_draws", v.surrogate_draws);
  if (v.trials < 2) r.fail("verify", "trials", "needs at least two trials");
  if (v.atoms < 2) r.fail("verify", "atoms", "needs at least two atoms");
  for (const auto& schema : csv_schemas()) {
    if (const auto pinned = r.raw("schemas", schema.name)) {
      v.pinned_schemas[schema.name] = *pinned;
    }
  }
  finalize(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "", 0, "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

/// A protocol for the [protocol] settings.
inline Protocol make_protocol(const RunConfig& c) {
  const ProtocolSettings& p = c.protocol;
  if (p.kind == ProtocolKind::kDeltaKick) {
    return delta_kick_protocol(p.reshape_ms, p.dt_ms, p.epsilon, c.probes, p.hold,
                               c.physics, p.kick_hold_ms);
  }
  return release_recapture_protocol(p.dt_ms, p.epsilon, c.probes, p.hold, c.physics);
}

}  // namespace squeezesim::io
