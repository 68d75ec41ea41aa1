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
/// Physical constants and unit conventions.
///
/// Lengths are in micrometres, times in milliseconds, temperatures in
/// microkelvin. Velocities are therefore um/ms (= mm/s) and accelerations
/// um/ms^2 (= m/s^2).

namespace squeezesim::constants {

inline constexpr double kPi = 3.14159265358979323846;

/// Boltzmann constant, J/K.
inline constexpr double kBoltzmann = 1.380649e-23;

/// Mass of a 87Rb atom, kg.
inline constexpr double kRb87Mass = 1.4432e-25;

/// Standard gravity in um/ms^2.
inline constexpr double kGravity = 9.81;

/// Cavity shift per spin flip at unit coupling, Hz.
inline constexpr double kShiftPerSpinFlipHz = 5.6;

/// Ensemble-averaged coupling of the trapped cloud used as the calibration
/// anchor for the slope-ratio method.
inline constexpr double kReferenceMeanEta = 0.9254;

inline constexpr double kProbeWavelengthNm = 780.0;
inline constexpr double kLatticeWavelengthNm = 1560.0;
inline constexpr double kLatticeDepthMicroK = 520.0;
inline constexpr double kLatticeSwitchingUs = 50.0;

/// Converts k_B T / m (SI, m^2/s^2) into (um/ms)^2.
inline constexpr double kSiVelocitySqToUmPerMsSq = 1.0e6;

}  // namespace squeezesim::constants
