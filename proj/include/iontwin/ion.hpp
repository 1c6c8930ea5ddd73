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

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "iontwin/constants.hpp"
#include "iontwin/errors.hpp"

namespace iontwin {

/// Sr+ level data used by the response models.  Wavelengths in nm,
/// times in seconds, field in tesla.
struct IonSpecies {
  double mass_kg = 88.0 * constants::amu;
  double qubit_wavelength_nm = 674.0;
  double d52_lifetime_s = 0.390;
  double s_p_wavelength_nm = 422.0;
  double repump_d32_wavelength_nm = 1092.0;
  double quench_wavelength_nm = 1033.0;
  double shelve_proxy_wavelength_nm = 408.0;
  double quantizing_field_t = 4.3 * gauss;  // normal to the chip
};

/// Intensity-to-Rabi-rate calibration for the optical qubit transition
/// |S,-1/2> -> |D,-5/2>.
struct RabiCalibration {
  double reference_intensity_w_m2 = 0.0;
  double reference_rabi_rad_s = 0.0;
  std::string transition = "S1/2(m=-1/2) -> D5/2(m=-5/2)";
};

struct MotionalState {
  double nbar = 0.0;
  double mode_omega = 2.0 * constants::pi * 1.3e6;  // rad/s
  double lamb_dicke = 0.06;
  double heating_rate_per_s = 0.0;  // quanta/s
};

/// Rabi rate at a given intensity: Omega scales as sqrt(I).
inline double rabi_at(const RabiCalibration& cal, double intensity_w_m2) {
  if (intensity_w_m2 < 0.0) throw ModelError("negative intensity");
  return cal.reference_rabi_rad_s *
         std::sqrt(intensity_w_m2 / cal.reference_intensity_w_m2);
}

inline double pi_time_s(double rabi_rad_s) {
  return constants::pi / rabi_rad_s;
}

/// Independent estimate of the quadrupole Rabi rate from the beam
/// intensity, with the matrix element fixed by the D5/2 decay rate:
///   Omega = g sqrt(3 lambda^3 Gamma I / (2 pi h c)),
/// the two-level saturation relation with Gamma = 1/tau.  The
/// dimensionless geometry factor absorbs the angular coupling of the
/// quadrupole transition and the beam/field orientation.
inline double first_principles_rabi(const IonSpecies& sp,
                                    double intensity_w_m2,
                                    double geometry_factor = 1.0) {
  if (geometry_factor < 0.0 || geometry_factor > 1.0)
    throw ModelError("geometry factor must lie in [0, 1]");
  if (intensity_w_m2 < 0.0) throw ModelError("negative intensity");
  const double lambda = sp.qubit_wavelength_nm * nm;
  const double gamma = 1.0 / sp.d52_lifetime_s;
  return geometry_factor *
         std::sqrt(3.0 * lambda * lambda * lambda * gamma * intensity_w_m2 /
                   (2.0 * constants::pi * constants::h * constants::c));
}

/// Two-beam saturation model of the detection fluorescence.
struct FluorescenceParams {
  double i_sat_422_w_m2 = 437.0;   // textbook S1/2-P1/2 value, assumption
  double i_sat_1092_w_m2 = 2400.0; // assumption; repump saturation scale
  double max_detected_rate_per_s = 0.0;  // collection x filter x scatter
};

/// Detected count rate: R = R_max s422/(1+s422) * s1092/(1+s1092); below
/// saturation this is proportional to both intensities.
inline double fluorescence_rate(double i_422_w_m2, double i_1092_w_m2,
                                const FluorescenceParams& p) {
  if (i_422_w_m2 < 0.0 || i_1092_w_m2 < 0.0)
    throw ModelError("negative intensity");
  const double s1 = i_422_w_m2 / p.i_sat_422_w_m2;
  const double s2 = i_1092_w_m2 / p.i_sat_1092_w_m2;
  return p.max_detected_rate_per_s * (s1 / (1.0 + s1)) * (s2 / (1.0 + s2));
}

/// Probability that the ion stays in D5/2 after a 1033-nm quench pulse.
inline double quench_survival(double i_1033_w_m2, double pulse_s,
                              double k_quench_m2_per_w_s) {
  if (i_1033_w_m2 < 0.0 || pulse_s < 0.0 || k_quench_m2_per_w_s < 0.0)
    throw ModelError("negative quench argument");
  return std::exp(-k_quench_m2_per_w_s * i_1033_w_m2 * pulse_s);
}

/// Unsaturated shelving proxy: dark probability linear in intensity,
/// clipped to [0, 1].
inline double shelve_probability(double i_408_w_m2, double peak_probability,
                                 double peak_intensity_w_m2) {
  if (i_408_w_m2 < 0.0) throw ModelError("negative intensity");
  return std::clamp(peak_probability * i_408_w_m2 / peak_intensity_w_m2, 0.0,
                    1.0);
}

/// eta = k cos(theta) sqrt(hbar / (2 m omega)).
inline double lamb_dicke(const IonSpecies& sp, double mode_omega,
                         double projection_cosine) {
  if (mode_omega <= 0.0) throw ModelError("mode frequency must be > 0");
  if (std::abs(projection_cosine) > 1.0)
    throw ModelError("|projection cosine| must be <= 1");
  const double k = 2.0 * constants::pi / (sp.qubit_wavelength_nm * nm);
  return std::abs(projection_cosine) * k *
         std::sqrt(constants::hbar / (2.0 * sp.mass_kg * mode_omega));
}

/// Linear heating model n(t) = n0 + rate t.
inline double heating_ledger(const MotionalState& m, double wait_s) {
  if (wait_s < 0.0) throw ModelError("negative wait time");
  return m.nbar + m.heating_rate_per_s * wait_s;
}

namespace ion_detail {

/// Excitation of one Rabi line at detuning delta from its center.
inline double rabi_line(double omega, double delta, double t) {
  if (omega == 0.0) return 0.0;
  const double w = std::sqrt(omega * omega + delta * delta);
  const double s = std::sin(0.5 * w * t);
  return (omega * omega) / (w * w) * s * s;
}

}  // namespace ion_detail

/// Carrier and first-sideband spectrum of the qubit transition: thermal
/// average of coherent Rabi lineshapes with lines at 0 and +-mode
/// frequency.  Sideband rates scale as eta sqrt(n) (red) and
/// eta sqrt(n+1) (blue).  Returns (detuning rad/s, dark probability).
inline std::vector<std::pair<double, double>> spectrum(
    const RabiCalibration& cal, const MotionalState& motion,
    const std::vector<double>& detuning_grid_rad_s, double probe_s,
    double intensity_w_m2) {
  if (probe_s <= 0.0) throw ModelError("probe time must be > 0");
  const double omega0 = rabi_at(cal, intensity_w_m2);
  const double eta = motion.lamb_dicke;
  // Thermal occupation, truncated where the tail is negligible.
  const double nb = motion.nbar;
  const int nmax = std::max(20, int(nb * 10.0 + 20.0));
  std::vector<double> pn(nmax + 1);
  for (int n = 0; n <= nmax; ++n)
    pn[n] = std::pow(nb / (nb + 1.0), n) / (nb + 1.0);
  std::vector<std::pair<double, double>> out;
  out.reserve(detuning_grid_rad_s.size());
  for (double delta : detuning_grid_rad_s) {
    double p = 0.0;
    for (int n = 0; n <= nmax; ++n) {
      const double carrier = ion_detail::rabi_line(omega0, delta, probe_s);
      const double red = ion_detail::rabi_line(
          omega0 * eta * std::sqrt(double(n)), delta + motion.mode_omega,
          probe_s);
      const double blue = ion_detail::rabi_line(
          omega0 * eta * std::sqrt(double(n + 1)), delta - motion.mode_omega,
          probe_s);
      p += pn[n] * (carrier + red + blue);
    }
    out.emplace_back(delta, std::min(p, 1.0));
  }
  return out;
}

/// Sideband-ratio thermometry: nbar = r / (1 - r), r = red/blue.
inline double nbar_from_sidebands(double red_peak, double blue_peak) {
  if (red_peak < 0.0 || red_peak >= blue_peak)
    throw RatioOutOfRange("need 0 <= red < blue");
  const double r = red_peak / blue_peak;
  return r / (1.0 - r);
}

}  // namespace iontwin
