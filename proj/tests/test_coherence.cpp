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

#include <cmath>
#include <utility>
#include <vector>

#include <doctest.h>

#include "iontwin/coherence.hpp"
#include "test_fixture.hpp"

using namespace iontwin;
using iontwin_test::fixture;

namespace {

std::vector<double> analysis_phases(int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(2.0 * constants::pi * i / n);
  return out;
}

struct Sweep {
  std::vector<double> accelerations;
  std::vector<RamseyResult> free_space, integrated;
};

Sweep run_sweep(const Scenario& sc, int shots, std::uint64_t seed) {
  Sweep out;
  const auto phases = analysis_phases(sc.ramsey.phases);
  const double a_max = sc.vibration.peak_acceleration();
  const double w2 = sc.vibration.vib_omega * sc.vibration.vib_omega;
  for (int i = 0; i < sc.ramsey.sweep_points; ++i) {
    const double a = a_max * double(i) / double(sc.ramsey.sweep_points - 1);
    out.accelerations.push_back(a);
    for (Delivery d : {Delivery::free_space, Delivery::integrated}) {
      VibrationScenario v = sc.vibration;
      v.delivery = d;
      v.amplitude_m = a / w2;
      (d == Delivery::free_space ? out.free_space : out.integrated)
          .push_back(ramsey_scan(v, sc.ramsey.delays_s, phases, shots, seed));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("vibration kinematics") {
  const VibrationScenario v = fixture().vibration;
  CHECK(v.peak_velocity() ==
        doctest::Approx(v.amplitude_m * v.vib_omega).epsilon(1e-12));
  CHECK(v.peak_acceleration() ==
        doctest::Approx(v.amplitude_m * v.vib_omega * v.vib_omega)
            .epsilon(1e-12));
  CHECK(doppler_peak_hz(v) == doctest::Approx(9000.0).epsilon(0.02));
  VibrationScenario still = v;
  still.amplitude_m = 0.0;
  CHECK(doppler_peak_hz(still) == 0.0);
  still.amplitude_m = 2.0 * v.amplitude_m;
  CHECK(doppler_peak_hz(still) ==
        doctest::Approx(2.0 * doppler_peak_hz(v)).epsilon(1e-12));
}

TEST_CASE("phase diffusion reproduces the exponential contrast") {
  const double tau0 = 600e-6;
  // Zero delay carries zero variance.
  CounterRng rng0(1, 0);
  CHECK(baseline_phase_noise(0.0, tau0, rng0) == 0.0);
  CHECK_THROWS_AS(baseline_phase_noise(-1.0, tau0, rng0), ModelError);
  // At T = tau0 the ensemble contrast is 1/e.
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(7, i);
    sum += std::cos(baseline_phase_noise(tau0, tau0, rng));
  }
  CHECK(sum / n == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
  // Variance adds over concatenated intervals: 2(T1+T2)/tau0.
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(9, i);
    const double p = baseline_phase_noise(100e-6, tau0, rng) +
                     baseline_phase_noise(250e-6, tau0, rng);
    var += p * p;
  }
  CHECK(var / n ==
        doctest::Approx(2.0 * 350e-6 / tau0).epsilon(0.02));
}

TEST_CASE("scan results are deterministic in the seed") {
  VibrationScenario v = fixture().vibration;
  const auto phases = analysis_phases(8);
  const std::vector<double> delays = {10e-6, 50e-6, 200e-6};
  const RamseyResult a = ramsey_scan(v, delays, phases, 200, 77);
  const RamseyResult b = ramsey_scan(v, delays, phases, 200, 77);
  REQUIRE(a.contrasts.size() == b.contrasts.size());
  for (std::size_t i = 0; i < a.contrasts.size(); ++i)
    CHECK(a.contrasts[i] == b.contrasts[i]);
  CHECK(a.fitted_tau_s == b.fitted_tau_s);
  const RamseyResult c = ramsey_scan(v, delays, phases, 200, 78);
  CHECK(a.contrasts[0] != c.contrasts[0]);
  CHECK_THROWS_AS(ramsey_scan(v, delays, phases, 50, 77), ModelError);
  CHECK_THROWS_AS(ramsey_scan(v, delays, analysis_phases(4), 200, 77),
                  ModelError);
}

TEST_CASE("quiet platform recovers the baseline coherence time") {
  const Scenario& sc = fixture();
  for (Delivery d : {Delivery::free_space, Delivery::integrated}) {
    VibrationScenario v = sc.vibration;
    v.delivery = d;
    v.amplitude_m = 0.0;
    const RamseyResult r =
        ramsey_scan(v, sc.ramsey.delays_s, analysis_phases(sc.ramsey.phases),
                    sc.ramsey.shots_per_point, sc.seed);
    CHECK(r.fitted_tau_s == doctest::Approx(600e-6).epsilon(0.05));
  }
}

TEST_CASE("integrated delivery cancels the vibration exactly") {
  const Scenario& sc = fixture();
  VibrationScenario moving = sc.vibration;
  moving.delivery = Delivery::integrated;
  VibrationScenario still = sc.vibration;
  still.delivery = Delivery::integrated;
  still.amplitude_m = 0.0;
  const auto phases = analysis_phases(sc.ramsey.phases);
  const RamseyResult a =
      ramsey_scan(moving, sc.ramsey.delays_s, phases, 500, sc.seed);
  const RamseyResult b =
      ramsey_scan(still, sc.ramsey.delays_s, phases, 500, sc.seed);
  for (std::size_t i = 0; i < a.contrasts.size(); ++i)
    CHECK(a.contrasts[i] == b.contrasts[i]);
}

TEST_CASE("free-space contrast is bounded and recovers as motion stops") {
  VibrationScenario v = fixture().vibration;
  v.baseline_coherence_s = 1e3;  // isolate the vibration term
  const auto phases = analysis_phases(12);
  const std::vector<double> delays = {200e-6, 400e-6};
  double prev = -1.0;
  for (double scale : {1.0, 0.3, 0.1, 0.0}) {
    VibrationScenario vv = v;
    vv.amplitude_m = scale * v.amplitude_m;
    double contrast = 1.0;
    try {
      const RamseyResult r = ramsey_scan(vv, delays, phases, 2000, 11);
      contrast = r.contrasts[0];
    } catch (const FitFailure&) {
      // Fully dephased first point; treat as zero contrast.
      contrast = 0.0;
    }
    CHECK(contrast <= 1.0 + 1e-9);
    CHECK(contrast >= prev - 0.02);
    prev = contrast;
  }
  CHECK(prev > 0.98);
}

TEST_CASE("decay fit recovers a synthetic exponential") {
  std::vector<double> t, c;
  for (int i = 0; i < 8; ++i) {
    t.push_back(i * 100e-6);
    c.push_back(0.97 * std::exp(-t.back() / 420e-6));
  }
  const auto d = fit::exponential_decay(t, c);
  CHECK(d.tau == doctest::Approx(420e-6).epsilon(0.01));
  CHECK(d.amplitude == doctest::Approx(0.97).epsilon(0.01));
}

TEST_CASE("free-space decay shortens monotonically with acceleration") {
  const Scenario& sc = fixture();
  const Sweep out = run_sweep(sc, sc.ramsey.shots_per_point, sc.seed);
  for (std::size_t i = 1; i < out.free_space.size(); ++i)
    CHECK(out.free_space[i].fitted_tau_s <
          out.free_space[i - 1].fitted_tau_s);
  // The integrated series stays at the baseline within two fit errors.
  for (const auto& r : out.integrated)
    CHECK(std::abs(r.fitted_tau_s - 600e-6) < 2.0 * r.fitted_tau_err_s);
  const double bound =
      suppression_bound(out.accelerations, out.free_space, out.integrated);
  CHECK(bound >= 25.0);
  // More shots shrink the slope uncertainty and raise the bound.
  const Sweep big = run_sweep(sc, 4 * sc.ramsey.shots_per_point, sc.seed);
  CHECK(suppression_bound(big.accelerations, big.free_space, big.integrated) >
        bound);
  // Two statistically flat series resolve no suppression.
  const double self_bound = suppression_bound(
      out.accelerations, out.integrated, out.integrated);
  CHECK(self_bound < 5.0);
}

TEST_CASE("track inversion bounds the centripetal acceleration") {
  const double r = 10e-6, w = 2.0 * constants::pi * 67.0;
  std::vector<std::pair<double, double>> pos;
  std::vector<double> ts;
  for (int i = 0; i < 120; ++i) {
    const double t = i * (1.0 / 67.0) / 100.0;
    ts.push_back(t);
    pos.emplace_back(r * std::cos(w * t), r * std::sin(w * t));
  }
  CHECK(acceleration_from_track(pos, ts) ==
        doctest::Approx(r * w * w).epsilon(0.02));
  // A stationary ion reports zero.
  std::vector<std::pair<double, double>> still(10, {1e-6, 2e-6});
  std::vector<double> ts10(ts.begin(), ts.begin() + 10);
  CHECK(acceleration_from_track(still, ts10) == 0.0);
  CHECK_THROWS_AS(acceleration_from_track({{0, 0}, {1e-6, 0}}, {0.0, 1e-3}),
                  DegenerateTrack);
}

TEST_CASE("imaged motion is consistent with the Doppler bound") {
  const VibrationScenario v = fixture().vibration;
  std::vector<std::pair<double, double>> pos;
  std::vector<double> ts;
  for (int i = 0; i < 200; ++i) {
    const double t = i * (2.0 * constants::pi / v.vib_omega) / 150.0;
    ts.push_back(t);
    pos.emplace_back(v.amplitude_m * std::cos(v.vib_omega * t),
                     v.amplitude_m * std::sin(v.vib_omega * t));
  }
  const double a = acceleration_from_track(pos, ts);
  CHECK(a == doctest::Approx(v.peak_acceleration()).epsilon(0.02));
  // Inverting the peak Doppler shift gives the same acceleration scale.
  const double a_doppler = doppler_peak_hz(v) *
                           (v.qubit_wavelength_nm * nm) * v.vib_omega;
  CHECK(a == doctest::Approx(a_doppler).epsilon(0.02));
}

TEST_CASE("degenerate decay series raises a fit failure") {
  VibrationScenario v = fixture().vibration;
  v.baseline_coherence_s = 1e-6;  // contrast collapses before the first delay
  CHECK_THROWS_AS(
      ramsey_scan(v, {100e-6, 200e-6}, analysis_phases(8), 200, 5),
      FitFailure);
}

TEST_CASE("suppression bound validates its inputs") {
  const Scenario& sc = fixture();
  const Sweep out = run_sweep(sc, 200, sc.seed);
  std::vector<RamseyResult> shorter(out.integrated.begin(),
                                    out.integrated.end() - 1);
  CHECK_THROWS_AS(
      suppression_bound(out.accelerations, out.free_space, shorter),
      InsufficientStatistics);
}
