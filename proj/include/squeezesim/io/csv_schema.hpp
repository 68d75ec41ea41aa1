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

#include <string>
#include <string_view>
#include <vector>

namespace squeezesim::io {

/// Column layout of one CSV output. Any change to the columns must bump the
/// version.
struct CsvSchema {
  std::string name;
  int version = 1;
  std::vector<std::string> columns;

  [[nodiscard]] std::string header() const {
    std::string h;
    for (const auto& c : columns) h += (h.empty() ? "" : ",") + c;
    return h;
  }

  /// "version|header", the form pinned in verify configs.
  [[nodiscard]] std::string fingerprint() const {
    return std::to_string(version) + "|" + header();
  }
};

inline const std::vector<CsvSchema>& csv_schemas() {
  static const std::vector<CsvSchema> schemas{
      {"trials", 1,
       {"trial", "theta1", "theta2", "epsilon", "theta0", "diff", "jz", "jz_eff",
        "prep_mean_eta", "prep_n_eff", "readout_mean_eta", "readout_mean_eta_sq",
        "readout_n_eff", "readout_p_eff", "shift_prep_hz", "shift_readout_hz"}},
      {"fig2", 1,
       {"dt_ms", "set_theta0", "trials", "mean_theta0", "sem_theta0", "mean_theta_eff",
        "sem_theta_eff"}},
      {"fig2_fit", 1,
       {"dt_ms", "slope", "slope_ci68", "points", "residual_variance"}},
      {"fig3a", 1,
       {"dt_ms", "reshape_ms", "one_minus_p_eff", "p_eff_sem", "mean_eta", "mean_eta_sq",
        "n_eff", "n_eff_sem", "p_eff_css", "p_eff_css_u"}},
      {"fig3b", 1,
       {"dt_ms", "p_eff", "p_eff_sem", "delta_theta_sq", "delta_theta_sq_ci68",
        "theory_delta_theta_sq"}},
      {"fig4a", 1,
       {"dt_ms", "coherence", "coherence_ci68", "coherence_configured"}},
      {"fig4b", 1,
       {"dt_ms", "xi_sq", "xi_sq_ci68_low", "xi_sq_ci68_high", "xi_db", "delta_theta",
        "delta_theta_u", "n_eff"}},
      {"calibration", 1,
       {"dt_ms", "mean_eta", "mean_eta_ci68", "mean_eta_geometric", "slope",
        "slope_ci68", "points_used"}},
  };
  return schemas;
}

inline const CsvSchema* find_schema(std::string_view name) {
  for (const auto& s : csv_schemas()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace squeezesim::io
