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
//
// End-to-end checks of the full toolchain against the published anchor
// numbers.  Prints one pass/fail line per criterion and exits nonzero if
// any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "iontwin/scenario.hpp"

namespace fs = std::filesystem;
using namespace iontwin;

namespace {

int g_failures = 0;

void run_criterion(const std::string& name,
                   const std::function<void(std::vector<std::string>&)>& body) {
  std::vector<std::string> problems;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(problems);
  } catch (const std::exception& e) {
    problems.push_back(std::string("exception: ") + e.what());
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (problems.empty()) {
    std::printf("PASS  %-28s (%.1f s)\n", name.c_str(), dt);
  } else {
    ++g_failures;
    std::printf("FAIL  %-28s (%.1f s)\n", name.c_str(), dt);
    for (const auto& p : problems) std::printf("      - %s\n", p.c_str());
  }
  std::fflush(stdout);
}

void require(std::vector<std::string>& problems, bool ok,
             const std::string& what) {
  if (!ok) problems.push_back(what);
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::abs(b);
}

/// Grating with its phase-matching index refreshed at an operating
/// wavelength; the etched period stays frozen.
GratingSpec grating_at(const Scenario& sc, const std::string& name,
                       double wavelength_nm) {
  GratingSpec g = sc.grating(name);
  const GratingSpec fresh = make_grating(sc.stack, wavelength_nm, g.duty_cycle);
  g.n_eff_tooth = fresh.n_eff_tooth;
  g.n_eff_gap = fresh.n_eff_gap;
  g.n_eff_grating = fresh.n_eff_grating;
  return g;
}

double probe_response(const Scenario& sc, const std::string& probe,
                      const BeamField& beam, const Eigen::Vector3d& pos_um) {
  const double intensity = intensity_at(beam, pos_um);
  if (probe == "rabi")
    return rabi_at(sc.rabi, intensity) / (2.0 * constants::pi);
  if (probe == "fluor") {
    if (beam.label == "1092")
      return fluorescence_rate(
          sc.free_space_repump_saturation * sc.fluor.i_sat_422_w_m2, intensity,
          sc.fluor);
    return fluorescence_rate(
        intensity, sc.free_space_repump_saturation * sc.fluor.i_sat_1092_w_m2,
        sc.fluor);
  }
  if (probe == "quench")
    return quench_survival(intensity, sc.quench_pulse_s,
                           sc.quench_k_m2_per_w_s);
  return shelve_probability(intensity, sc.shelve_peak_probability,
                            sc.shelve_peak_intensity_w_m2);
}

double intensity_proxy(const std::string& probe, double signal) {
  if (probe == "rabi") return signal * signal;
  if (probe == "quench") return signal > 0.0 ? -std::log(signal) : 0.0;
  return signal;
}

struct ScanResult {
  double center_um = 0.0;
  double diameter_um = 0.0;
};

/// Shuttle the ion through the beam and invert the probe response, the
/// same procedure the profiling command runs.
ScanResult shuttle_profile(const Scenario& sc, const std::string& probe,
                           const std::string& beam_label, int points) {
  const BeamField& beam = sc.beam(beam_label);
  const Eigen::Vector3d aim =
      beam.origin_um + beam.focus_distance_focused_um * beam.direction;
  const double span = 1.5 * 2.0 * beam.waist_focused_um;
  std::vector<double> ys, proxy;
  for (int i = 0; i < points; ++i) {
    const double y = aim.y() - span + 2.0 * span * i / (points - 1);
    const WellSolution w = solve_axial_well(sc.trap, y * um, sc.axial_omega);
    const double signal = probe_response(sc, probe, beam, w.position / um);
    ys.push_back(y);
    proxy.push_back(intensity_proxy(probe, signal));
  }
  const fit::GaussianFit g = fit::gaussian(ys, proxy);
  return {g.center, g.diameter()};
}

ScanResult direct_cut(const Scenario& sc, const std::string& beam_label) {
  const BeamField& beam = sc.beam(beam_label);
  const Eigen::Vector3d aim =
      beam.origin_um + beam.focus_distance_focused_um * beam.direction;
  const double halfspan = 3.0 * beam.waist_focused_um + 5.0;
  std::vector<double> ys;
  for (double y = aim.y() - halfspan; y <= aim.y() + halfspan + 1e-9; y += 0.05)
    ys.push_back(y);
  const fit::GaussianFit g =
      fit_cut(axial_cut(beam, aim.z(), aim.x(), ys));
  return {g.center, g.diameter()};
}

struct SweepOutcome {
  std::vector<double> accelerations;
  std::vector<RamseyResult> free_space, integrated;
};

SweepOutcome run_sweep(const Scenario& sc, std::uint64_t seed) {
  std::vector<double> phases;
  for (int i = 0; i < sc.ramsey.phases; ++i)
    phases.push_back(2.0 * constants::pi * i / sc.ramsey.phases);
  SweepOutcome out;
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
          .push_back(ramsey_scan(v, sc.ramsey.delays_s, phases,
                                 sc.ramsey.shots_per_point, seed));
    }
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " <scenario.json> <cli-binary>\n";
    return 2;
  }
  const std::string scenario_path = argv[1];
  const std::string cli_path = argv[2];
  const Scenario sc = load_scenario_file(scenario_path);

  run_criterion("loss-ledger", [&](std::vector<std::string>& p) {
    require(p, total_loss(sc.channel("422")) == 35.0, "422 total != 35 dB");
    require(p, total_loss(sc.channel("461")) == 31.5, "461 total != 31.5 dB");
    require(p, total_loss(sc.channel("674")) == 31.4, "674 total != 31.4 dB");
    require(p, total_loss(sc.channel("1092")) == 26.4, "1092 total != 26.4 dB");
  });

  run_criterion("detection-fidelity", [&](std::vector<std::string>& p) {
    const CountHistogram bright = bright_histogram(sc.detection);
    const CountHistogram dark = dark_histogram_with_decay(sc.detection);
    const double f = fidelity(bright, dark).mean_fidelity;
    require(p, f >= 0.985 && f <= 0.995,
            "fidelity " + std::to_string(f) + " outside [0.985, 0.995]");
    require(p,
            std::abs(dark.mean() - dark_histogram_mean_analytic(sc.detection)) <
                1e-6,
            "dark first moment disagrees with the closed form");
    const CountHistogram mc =
        sample_dark_histogram(sc.detection, 10'000'000, sc.seed);
    const double tv = total_variation(dark, mc);
    require(p, tv < 1e-3,
            "TV distance to 1e7-shot Monte Carlo = " + std::to_string(tv));
  });

  run_criterion("pi-time", [&](std::vector<std::string>& p) {
    const double i_ref = sc.rabi.reference_intensity_w_m2;
    const double t_cal = pi_time_s(rabi_at(sc.rabi, i_ref));
    require(p, std::abs(t_cal - 6.5e-6) < 1e-15,
            "calibrated pi time != 6.5 us");
    const double t_fp = pi_time_s(first_principles_rabi(sc.species, i_ref));
    require(p, t_fp > 0.5 * 6.5e-6 && t_fp < 2.0 * 6.5e-6,
            "first-principles pi time " + std::to_string(t_fp * 1e6) +
                " us outside factor 2 of 6.5 us");
  });

  run_criterion("spectroscopy", [&](std::vector<std::string>& p) {
    const double step = 2.0 * constants::pi * sc.spectrum_cfg.step_hz;
    std::vector<double> grid;
    const long n = std::lround(sc.spectrum_cfg.span_hz / sc.spectrum_cfg.step_hz);
    for (long i = -n; i <= n; ++i) grid.push_back(double(i) * step);
    const auto spec = spectrum(sc.rabi, sc.motion, grid, sc.spectrum_cfg.probe_s,
                               sc.rabi.reference_intensity_w_m2);
    const double w_ax = sc.motion.mode_omega;
    auto peak_near = [&](double center) {
      double best = -1.0, where = 0.0;
      for (const auto& [d, q] : spec)
        if (std::abs(d - center) < 0.4 * w_ax && q > best) {
          best = q;
          where = d;
        }
      return where;
    };
    require(p, std::abs(peak_near(0.0)) < 0.5 * step, "carrier peak off zero");
    require(p, std::abs(peak_near(w_ax) - w_ax) <= 1.5 * step,
            "blue sideband away from +1.3 MHz");
    require(p, std::abs(peak_near(-w_ax) + w_ax) <= 1.5 * step,
            "red sideband away from -1.3 MHz");
    for (double nbar : {0.1, 0.5, 2.0}) {
      MotionalState m = sc.motion;
      m.nbar = nbar;
      const auto sb = spectrum(sc.rabi, m, {-w_ax, w_ax}, 100.0 * 6.5e-6,
                               1e-4 * sc.rabi.reference_intensity_w_m2);
      const double est = nbar_from_sidebands(sb[0].second, sb[1].second);
      require(p, close(est, nbar, 0.05),
              "thermometry misses nbar=" + std::to_string(nbar) + " (got " +
                  std::to_string(est) + ")");
    }
  });

  run_criterion("in-situ-profiling", [&](std::vector<std::string>& p) {
    const struct {
      const char* probe;
      const char* beam;
      double paper_diameter_um;
    } cases[] = {{"rabi", "674", 13.0},
                 {"fluor", "422", 8.5},
                 {"fluor", "1092", 5.5},
                 {"quench", "1033", 6.7},
                 {"shelve", "408", 11.3}};
    for (const auto& c : cases) {
      const ScanResult scan = shuttle_profile(sc, c.probe, c.beam, 41);
      const ScanResult cut = direct_cut(sc, c.beam);
      require(p, close(scan.diameter_um, cut.diameter_um, 0.03),
              std::string(c.beam) + " scan diameter " +
                  std::to_string(scan.diameter_um) + " vs cut " +
                  std::to_string(cut.diameter_um));
      require(p, std::abs(scan.center_um - cut.center_um) <
                     0.03 * cut.diameter_um,
              std::string(c.beam) + " scan center offset too large");
      require(p, close(scan.diameter_um, c.paper_diameter_um, 0.02),
              std::string(c.beam) + " diameter " +
                  std::to_string(scan.diameter_um) + " vs published " +
                  std::to_string(c.paper_diameter_um));
    }
  });

  run_criterion("trap", [&](std::vector<std::string>& p) {
    const Eigen::Vector3d null = find_null_at_y(sc.trap, 0.0);
    require(p, std::abs(null.z() - 55e-6) < 0.5e-6,
            "RF null height " + std::to_string(null.z() * 1e6) + " um");
    // Harmonicity and gradient consistency at a probe point.
    const ElectrodePatch pad{"pad",  30e-6, 150e-6, -2e-3,
                             2e-3,   ElectrodeRole::DC, 1.0};
    const Eigen::Vector3d r{10e-6, 40e-6, 55e-6};
    double lap = 0.0, scale = 0.0;
    const double h2 = 1e-7;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d rp = r, rm = r;
      rp(k) += h2;
      rm(k) -= h2;
      const double second = (patch_potential(pad, rp) +
                             patch_potential(pad, rm) -
                             2.0 * patch_potential(pad, r)) /
                            (h2 * h2);
      lap += second;
      scale += std::abs(second);
    }
    require(p, std::abs(lap) < 1e-4 * std::max(scale, 1.0 / (55e-6 * 55e-6)),
            "Laplacian residual above scale");
    const Eigen::Vector3d g = patch_shape_gradient(pad, r);
    const double h1 = 1e-9;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d rp = r, rm = r;
      rp(k) += h1;
      rm(k) -= h1;
      const double fd = (patch_shape(pad, rp) - patch_shape(pad, rm)) / (2.0 * h1);
      require(p, std::abs(g(k) - fd) <= 1e-6 * std::abs(fd),
              "analytic gradient disagrees with finite differences");
    }
    const WellSolution w = solve_axial_well(sc.trap, 0.0, sc.axial_omega);
    require(p, close(w.secular_omega(1), sc.axial_omega, 0.01),
            "axial frequency misses 1.3 MHz");
    // Frequency follows the square root of the voltage over a factor 4.
    TrapModel scaled = sc.trap;
    const auto dc = scaled.dc_indices();
    for (std::size_t j = 0; j < dc.size(); ++j)
      scaled.patches[dc[j]].voltage = 4.0 * w.dc_voltages[j];
    const Eigen::Matrix3d hess = total_energy_hessian_j(scaled, w.position);
    Eigen::Vector3d vals;
    Eigen::Matrix3d vecs;
    trap_detail::jacobi_eigen3(hess, vals, vecs);
    int axial = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(vecs(1, i)) > std::abs(vecs(1, axial))) axial = i;
    const double w4 = std::sqrt(vals(axial) / scaled.ion_mass_kg);
    require(p, close(w4, 2.0 * w.secular_omega(1), 0.01),
            "axial frequency does not scale as sqrt(V)");
  });

  run_criterion("ramsey-vibration", [&](std::vector<std::string>& p) {
    const SweepOutcome out = run_sweep(sc, sc.seed);
    require(p, close(out.free_space[0].fitted_tau_s, 600e-6, 0.05),
            "free-space tau(A=0) outside 600 us +- 5%");
    require(p, close(out.integrated[0].fitted_tau_s, 600e-6, 0.05),
            "integrated tau(A=0) outside 600 us +- 5%");
    for (const auto& r : out.integrated)
      require(p,
              std::abs(r.fitted_tau_s - 600e-6) < 2.0 * r.fitted_tau_err_s,
              "integrated tau departs from baseline by > 2 sigma");
    for (std::size_t i = 1; i < out.free_space.size(); ++i)
      require(p,
              out.free_space[i].fitted_tau_s <
                  out.free_space[i - 1].fitted_tau_s,
              "free-space tau not strictly decreasing");
    const double bound =
        suppression_bound(out.accelerations, out.free_space, out.integrated);
    require(p, bound >= 25.0,
            "suppression bound " + std::to_string(bound) + " < 25");
    require(p, close(doppler_peak_hz(sc.vibration), 9000.0, 0.02),
            "Doppler peak away from 9 kHz");
  });

  run_criterion("photonics", [&](std::vector<std::string>& p) {
    // Reconstruction round trip on the qubit beam, noise free.
    const BeamField& beam = sc.beam("674");
    const Eigen::Vector3d aim =
        beam.origin_um + beam.focus_distance_focused_um * beam.direction;
    std::vector<double> heights;
    for (int i = 0; i <= 10; ++i) heights.push_back(aim.z() - 25.0 + 5.0 * i);
    SliceGrid grid;
    grid.spacing_um = 0.5;
    grid.nx = 121;
    grid.ny = 121;
    grid.x0_um = aim.x() - 0.5 * (grid.nx - 1) * grid.spacing_um;
    grid.y0_um = aim.y() - 0.5 * (grid.ny - 1) * grid.spacing_um;
    FocalStack stack = synthesize_stack(beam, heights, grid);
    const BeamEstimate clean = reconstruct_beam(stack);
    require(p, close(clean.waist_focused_um, beam.waist_focused_um, 0.01),
            "noise-free focused waist off by > 1%");
    require(p, close(clean.waist_unfocused_um, beam.waist_unfocused_um, 0.01),
            "noise-free unfocused waist off by > 1%");
    // 1% additive noise, looser 5% budget.
    CounterRng rng(sc.seed, 99);
    for (auto& s : stack.slices) {
      const double sigma = 0.01 * s.maxCoeff();
      for (int i = 0; i < s.rows(); ++i)
        for (int j = 0; j < s.cols(); ++j)
          s(i, j) = std::max(0.0, s(i, j) + sigma * rng.normal());
    }
    const BeamEstimate noisy = reconstruct_beam(stack, 0.05);
    require(p, close(noisy.waist_focused_um, beam.waist_focused_um, 0.05),
            "noisy focused waist off by > 5%");
    require(p, close(noisy.waist_unfocused_um, beam.waist_unfocused_um, 0.05),
            "noisy unfocused waist off by > 5%");
    // Grating design and angle are inverse maps.
    for (double angle : {0.0, 10.0, 24.4, 35.0}) {
      GratingSpec g = grating_at(sc, "red", 674.0);
      g.period_nm = design_period_nm(g.n_eff_grating, 674.0, angle);
      require(p, std::abs(emission_angle_deg(g, 674.0) - angle) < 1e-9,
              "design/angle round trip exceeds 1e-9 deg");
    }
    const struct {
      double width_nm, wavelength_nm;
      bool single;
    } modes[] = {{250.0, 405.0, true},  {300.0, 461.0, true},
                 {450.0, 674.0, true},  {1100.0, 1092.0, true},
                 {1100.0, 405.0, false}};
    for (const auto& m : modes)
      require(p,
              waveguide_neff(sc.stack, m.width_nm, m.wavelength_nm)
                      .single_mode == m.single,
              "single-mode verdict wrong at " + std::to_string(m.width_nm) +
                  " nm / " + std::to_string(m.wavelength_nm) + " nm");
    // Index error moves the beam crossing upward for negative errors.
    const GratingSpec red = grating_at(sc, "red", 674.0);
    const GratingSpec ir = grating_at(sc, "ir", 1092.0);
    const IntersectionResult nom = intersection_height(red, ir, 674.0, 1092.0);
    const IntersectionResult low =
        intersection_height(red, ir, 674.0, 1092.0, -0.05);
    require(p, nom.dz_dn_um < 0.0, "dz/dn not negative");
    require(p, low.height_um > nom.height_um,
            "negative index error fails to raise the crossing");
  });

  run_criterion("determinism", [&](std::vector<std::string>& p) {
    const fs::path base = fs::temp_directory_path() / "iontwin_acceptance";
    fs::remove_all(base);
    for (const char* run : {"a", "b"}) {
      const fs::path dir = base / run;
      const std::string cmd = cli_path + " --scenario " + scenario_path +
                              " --out " + dir.string() +
                              " --seed 20260823 reproduce-paper > /dev/null";
      require(p, std::system(cmd.c_str()) == 0,
              std::string("reproduce-paper run ") + run + " failed");
    }
    for (const char* name : {"reproduce_report.json", "reproduce_report.csv"}) {
      const std::string a = slurp(base / "a" / name);
      const std::string b = slurp(base / "b" / name);
      require(p, !a.empty(), std::string(name) + " missing or empty");
      require(p, a == b, std::string(name) + " differs between runs");
    }
    fs::remove_all(base);
  });

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
