/* Copyright 2026 The pdmr-sim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

namespace pdmr {

// General physical constants (SI, CODATA 2018 exact values where defined).
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
inline constexpr double kLn2 = 0.69314718055994530942;

// Diamond lattice: carbon atom density, per cubic micrometre and per ppm.
inline constexpr double kDiamondAtomDensityPerUm3 = 1.76e11;
inline constexpr double kDiamondAtomsPerPpmPerUm3 = 1.76e5;

// Breakdown field of air at standard conditions (Paschen limit), V/um.
inline constexpr double kAirBreakdownFieldVPerUm = 3.0;

}  // namespace pdmr
