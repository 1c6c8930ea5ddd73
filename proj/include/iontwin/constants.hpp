// Copyright 2026 The iontwin Authors.
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

namespace iontwin {

/// Physical constants (SI, CODATA 2018).
namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double c = 2.99792458e8;              // m/s
inline constexpr double h = 6.62607015e-34;            // J s
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double amu = 1.66053906660e-27;       // kg
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m
}  // namespace constants

// Unit helpers.  Internal computations are SI (meters, seconds, volts);
// these keep scenario-facing values readable.
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double cm = 1e-2;
inline constexpr double us = 1e-6;
inline constexpr double ms = 1e-3;
inline constexpr double mW = 1e-3;
inline constexpr double uW = 1e-6;
inline constexpr double MHz = 1e6;
inline constexpr double gauss = 1e-4;  // tesla

inline double deg_to_rad(double d) { return d * constants::pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / constants::pi; }

}  // namespace iontwin
