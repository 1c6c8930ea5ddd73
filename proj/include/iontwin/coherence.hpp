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

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iontwin/constants.hpp"
#include "iontwin/errors.hpp"
#include "iontwin/fit.hpp"
#include "iontwin/rng.hpp"

namespace iontwin {

enum class Delivery { free_space, integrated };

inline const char* to_string(Delivery d) {
  return d == Delivery::free_space ? "free_space" : "integrated";
}

/// Sinusoidal platform vibration seen by the light-delivery path.
/// With integrated delivery the ion and the optics move together, so the
/// optical phase picks up no vibration term at all.
struct VibrationScenario {
  double amplitude_m = 0.0;
  double vib_omega = 2.0 * constants::pi * 67.0;  // rad/s
  Delivery delivery = Delivery::free_space;
  double qubit_wavelength_nm = 674.0;
  double baseline_coherence_s = 600e-6;

  double peak_velocity() const { return amplitude_m * vib_omega; }
  double peak_acceleration() const {
    return amplitude_m * vib_omega * vib_omega;
  }
};

/// Peak Doppler shift f_D = A omega / lambda (Hz).
inline double doppler_peak_hz(const VibrationScenario& s) {
  return s.peak_velocity() / (s.qubit_wavelength_nm * nm);
}

/// Gaussian phase-diffusion sample with variance 2 T / tau0, chosen so
/// the ensemble contrast is exp(-T/tau0).
inline double baseline_phase_noise(double delay_s, double tau0_s,
                                   CounterRng& rng) {
  if (delay_s < 0.0) throw ModelError("negative Ramsey delay");
  return std::sqrt(2.0 * delay_s / tau0_s) * rng.normal();
}

struct RamseyResult {
  std::vector<double> delays_s;
  std::vector<double> contrasts;
  std::vector<double> contrast_errs;
  double fitted_tau_s = 0.0;
  double fitted_tau_err_s = 0.0;
};

/// Ramsey fringe scan under vibration.  Per shot the accumulated phase
/// error is Gaussian baseline noise plus, for free-space delivery, the
/// optical path change (2 pi / lambda)(x(t0+T) - x(t0)) of the sinusoidal
/// platform motion with a uniformly random mechanical phase.  Bright
/// probabilities follow the cos^2 fringe law, shots are sampled binomially,
/// the per-delay fringe is fitted to a sinusoid, and the contrasts to an
/// exponential.  Deterministic for a given seed under any parallel
/// schedule (counter-based RNG keyed by delay, phase, and shot index).
inline RamseyResult ramsey_scan(const VibrationScenario& scn,
                                const std::vector<double>& delays_s,
                                const std::vector<double>& phases_rad,
                                int shots_per_point, std::uint64_t seed,
                                double min_fit_contrast = 0.05) {
  if (shots_per_point < 100) throw ModelError("need >= 100 shots per point");
  if (phases_rad.size() < 6) throw ModelError("need >= 6 analysis phases");
  const double k_opt =
      2.0 * constants::pi / (scn.qubit_wavelength_nm * nm);
  RamseyResult res;
  res.delays_s = delays_s;
  for (std::size_t di = 0; di < delays_s.size(); ++di) {
    const double T = delays_s[di];
    std::vector<double> pb(phases_rad.size());
    for (std::size_t pi = 0; pi < phases_rad.size(); ++pi) {
      long bright = 0;
      for (int shot = 0; shot < shots_per_point; ++shot) {
        CounterRng rng(seed, di, pi, std::uint64_t(shot));
        double dphi = baseline_phase_noise(T, scn.baseline_coherence_s, rng);
        if (scn.delivery == Delivery::free_space && scn.amplitude_m > 0.0) {
          const double theta = 2.0 * constants::pi * rng.uniform();
          const double x0 = scn.amplitude_m * std::sin(theta);
          const double x1 =
              scn.amplitude_m * std::sin(scn.vib_omega * T + theta);
          dphi += k_opt * (x1 - x0);
        }
        const double p =
            0.5 * (1.0 + std::cos(phases_rad[pi] - dphi));
        if (rng.uniform() < p) ++bright;
      }
      pb[pi] = double(bright) / double(shots_per_point);
    }
    const auto fringe = fit::sinusoid(phases_rad, pb);
    res.contrasts.push_back(2.0 * fringe.amplitude);
    // Binomial error on each fringe point, propagated to the amplitude.
    res.contrast_errs.push_back(
        2.0 * std::sqrt(2.0 / (double(shots_per_point) * phases_rad.size())) *
        0.5);
  }
  // Exponential fit over the initial decay only.  The vibration-phase
  // contrast envelope is an oscillating Bessel average whose slow outer
  // lobes are not exponential, so the fit stops once the contrast falls
  // below half its first value (or the noise floor).
  const double stop_level =
      std::max(min_fit_contrast, 0.5 * res.contrasts.front());
  std::vector<double> ft, fc;
  for (std::size_t i = 0; i < res.contrasts.size(); ++i) {
    if (res.contrasts[i] < stop_level) break;
    ft.push_back(res.delays_s[i]);
    fc.push_back(res.contrasts[i]);
  }
  if (ft.size() < 2)
    throw FitFailure("fewer than 2 Ramsey points above the contrast floor");
  const auto decay = fit::exponential_decay(ft, fc);
  res.fitted_tau_s = decay.tau;
  res.fitted_tau_err_s = decay.tau_err;
  return res;
}

/// Lower-bound acceleration from an imaged 2D track, using the circular
/// motion approximation a = v^2 / r with v the peak sampled speed and r
/// the maximum excursion from the track centroid.
inline double acceleration_from_track(
    const std::vector<std::pair<double, double>>& positions_m,
    const std::vector<double>& timestamps_s, double resolution_m = 1e-7) {
  const std::size_t n = positions_m.size();
  if (n < 3 || timestamps_s.size() != n)
    throw DegenerateTrack("need >= 3 samples");
  double cx = 0, cy = 0;
  for (const auto& [x, y] : positions_m) {
    cx += x;
    cy += y;
  }
  cx /= double(n);
  cy /= double(n);
  double r = 0.0;
  for (const auto& [x, y] : positions_m)
    r = std::max(r, std::hypot(x - cx, y - cy));
  if (r < resolution_m) return 0.0;
  double v = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = timestamps_s[i] - timestamps_s[i - 1];
    if (dt <= 0.0) throw DegenerateTrack("timestamps must increase");
    const double d = std::hypot(positions_m[i].first - positions_m[i - 1].first,
                                positions_m[i].second -
                                    positions_m[i - 1].second);
    v = std::max(v, d / dt);
  }
  return v * v / r;
}

/// Vibration-suppression bound from two decay-vs-acceleration series:
/// magnitude of the free-space slope over the uncertainty of the
/// integrated slope, both from weighted linear fits of tau(a).
inline double suppression_bound(const std::vector<double>& accelerations,
                                const std::vector<RamseyResult>& free_space,
                                const std::vector<RamseyResult>& integrated) {
  if (free_space.size() != accelerations.size() ||
      integrated.size() != accelerations.size() || accelerations.size() < 3)
    throw InsufficientStatistics("series must share an acceleration grid");
  auto fit_slope = [&](const std::vector<RamseyResult>& series) {
    std::vector<double> taus, errs;
    for (const auto& r : series) {
      taus.push_back(r.fitted_tau_s);
      errs.push_back(std::max(r.fitted_tau_err_s, 1e-12));
    }
    return fit::linear_weighted(accelerations, taus, errs);
  };
  const auto fs = fit_slope(free_space);
  const auto in = fit_slope(integrated);
  if (in.slope_err <= 0.0)
    throw InsufficientStatistics("integrated-series slope error is zero");
  return std::abs(fs.slope) / in.slope_err;
}

}  // namespace iontwin
