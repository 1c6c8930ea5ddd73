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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iontwin/beams.hpp"
#include "iontwin/channels.hpp"
#include "iontwin/coherence.hpp"
#include "iontwin/constants.hpp"
#include "iontwin/detection.hpp"
#include "iontwin/ion.hpp"
#include "iontwin/photonics.hpp"
#include "iontwin/trap.hpp"

namespace iontwin {

using json = nlohmann::ordered_json;

/// Ramsey sweep configuration from the scenario file.
struct RamseyConfig {
  int sweep_points = 6;
  int shots_per_point = 1000;
  int phases = 12;
  std::vector<double> delays_s;
};

struct SpectrumConfig {
  double span_hz = 2e6;     // detunings in [-span, span]
  double step_hz = 10e3;
  double probe_s = 6.5e-6;
};

/// Fully resolved scenario: every model of the chip, trap, ion, and
/// measurement chain, built from one JSON file.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t file_hash = 0;

  LayerStack stack;
  std::vector<OpticalChannel> channels;
  std::vector<GratingSpec> gratings;
  std::vector<BeamField> beams;
  TrapModel trap;
  double axial_omega = 2.0 * constants::pi * 1.3e6;
  IonSpecies species;
  MotionalState motion;
  RabiCalibration rabi;
  FluorescenceParams fluor;
  double free_space_repump_saturation = 0.25;
  double quench_k_m2_per_w_s = 0.0;
  double quench_pulse_s = 0.0;
  double shelve_peak_probability = 0.4;
  double shelve_peak_intensity_w_m2 = 0.0;
  DetectionModel detection;
  VibrationScenario vibration;
  RamseyConfig ramsey;
  SpectrumConfig spectrum_cfg;

  const OpticalChannel& channel(const std::string& label) const {
    for (const auto& c : channels)
      if (c.label == label) return c;
    throw SchemaError("channels: no channel labelled '" + label + "'");
  }
  const GratingSpec& grating(const std::string& n) const {
    for (const auto& g : gratings)
      if (g.name == n) return g;
    throw SchemaError("gratings: no grating named '" + n + "'");
  }
  const BeamField& beam(const std::string& label) const {
    for (const auto& b : beams)
      if (b.label == label) return b;
    throw SchemaError("beams: no beam labelled '" + label + "'");
  }

  /// Ion location probed by the in-situ scans: the aim point of a beam
  /// lies on the trap axis, so its peak intensity there is the
  /// calibration intensity.
  double peak_intensity(const std::string& beam_label) const {
    const BeamField& b = beam(beam_label);
    const Eigen::Vector3d aim =
        b.origin_um + b.focus_distance_focused_um * b.direction;
    return intensity_at(b, aim);
  }
};

namespace scenario_detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline const json& require(const json& j, const std::string& key,
                           const std::string& path) {
  if (!j.contains(key))
    throw SchemaError(path + ": missing required key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& key,
                     const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number())
    throw SchemaError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

inline std::string text(const json& j, const std::string& key,
                        const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string())
    throw SchemaError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline LossStage parse_stage(const std::string& s, const std::string& path) {
  if (s == "on_chip_coupling") return LossStage::on_chip_coupling;
  if (s == "propagation") return LossStage::propagation;
  if (s == "grating") return LossStage::grating;
  if (s == "fiber_feedthrough") return LossStage::fiber_feedthrough;
  if (s == "cooldown") return LossStage::cooldown;
  throw SchemaError(path + ": unknown loss stage '" + s + "'");
}

inline Eigen::Vector3d vec3(const json& j, const std::string& key,
                            const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_array() || v.size() != 3)
    throw SchemaError(path + "." + key + ": expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace scenario_detail

inline Scenario load_scenario(const json& root, std::uint64_t file_hash = 0) {
  using namespace scenario_detail;
  Scenario sc;
  sc.file_hash = file_hash;
  if (number(root, "schema_version", "$") != 1)
    throw SchemaError("$.schema_version: only version 1 is supported");
  sc.name = text(root, "name", "$");
  sc.seed = std::uint64_t(number_or(root, "seed", 0));

  // Layer stack.
  {
    const json& s = require(root, "stack", "$");
    sc.stack.core_index = number(s, "core_index", "$.stack");
    sc.stack.clad_index = number(s, "clad_index", "$.stack");
    sc.stack.core_thickness_nm = number(s, "core_thickness_nm", "$.stack");
    sc.stack.etch_depth_nm = number(s, "etch_depth_nm", "$.stack");
    sc.stack.reference_wavelength_nm =
        number_or(s, "reference_wavelength_nm", 633.0);
    if (!(sc.stack.core_index > sc.stack.clad_index) ||
        sc.stack.clad_index < 1.0)
      throw SchemaError("$.stack: need core_index > clad_index >= 1");
    if (sc.stack.etch_depth_nm < 0.0 ||
        sc.stack.etch_depth_nm > sc.stack.core_thickness_nm)
      throw SchemaError("$.stack: etch depth outside [0, core thickness]");
  }

  // Gratings: either an explicit period or a design directive aiming the
  // first diffraction order at a point above the chip.
  for (const auto& g : require(root, "gratings", "$")) {
    const std::string path = "$.gratings[" + text(g, "name", "$.gratings") + "]";
    GratingSpec spec = make_grating(
        sc.stack, number(g, "design_wavelength_nm", path),
        number_or(g, "duty_cycle", 0.5));
    spec.name = text(g, "name", path);
    spec.position_um = vec3(g, "position_um", path);
    spec.emitter_width_um = number_or(g, "emitter_width_um", 18.0);
    spec.transverse_focal_length_um =
        number_or(g, "transverse_focal_length_um", 0.0);
    if (g.contains("period_nm")) {
      spec.period_nm = number(g, "period_nm", path);
      const json& az = require(g, "azimuth", path);
      spec.propagation_azimuth =
          Eigen::Vector2d(az[0].get<double>(), az[1].get<double>()).normalized();
    } else {
      const Eigen::Vector3d aim = vec3(g, "aim_point_um", path);
      const Eigen::Vector3d d = aim - spec.position_um;
      if (d.z() <= 0.0)
        throw SchemaError(path + ".aim_point_um: must lie above the chip");
      spec.propagation_azimuth = d.head<2>().normalized();
      const double angle_deg =
          rad_to_deg(std::atan2(d.head<2>().norm(), d.z()));
      spec.period_nm = design_period_nm(
          spec.n_eff_grating, number(g, "design_wavelength_nm", path),
          angle_deg);
    }
    sc.gratings.push_back(spec);
  }

  // Channels and loss ledgers.
  for (const auto& c : require(root, "channels", "$")) {
    OpticalChannel ch;
    ch.label = text(c, "label", "$.channels");
    const std::string path = "$.channels[" + ch.label + "]";
    ch.wavelength_nm = number(c, "wavelength_nm", path);
    ch.fiber_power_mw = number(c, "fiber_power_mw", path);
    ch.waveguide_width_nm = number(c, "waveguide_width_nm", path);
    ch.grating = text(c, "grating", path);
    sc.grating(ch.grating);  // must resolve
    if (ch.wavelength_nm <= 0 || ch.fiber_power_mw < 0 ||
        ch.waveguide_width_nm <= 0)
      throw SchemaError(path + ": wavelength/width must be > 0, power >= 0");
    const json& led = require(c, "ledger", path);
    ch.ledger.propagation_rate_db_per_cm =
        number_or(led, "propagation_rate_db_per_cm", 0.0);
    ch.ledger.propagation_length_cm =
        number_or(led, "propagation_length_cm", 0.0);
    for (const auto& e : require(led, "entries", path + ".ledger")) {
      LossEntry le;
      le.stage =
          parse_stage(text(e, "stage", path + ".ledger.entries"), path);
      le.loss_db = number(e, "loss_db", path + ".ledger.entries");
      if (le.loss_db < 0.0)
        throw SchemaError(path + ".ledger: losses must be >= 0 dB");
      le.inferred = e.contains("inferred") && e.at("inferred").get<bool>();
      ch.ledger.entries.push_back(le);
    }
    if (!ledger_consistent(ch.ledger))
      throw SchemaError(path +
                        ".ledger: propagation entry inconsistent with "
                        "rate x length beyond 0.05 dB");
    sc.channels.push_back(ch);
  }

  // Beams: explicit origin plus an aim point on the trap axis; waists are
  // the 1/e^2 radii at the aim point, where both axes focus.
  for (const auto& b : require(root, "beams", "$")) {
    BeamField beam;
    beam.label = text(b, "label", "$.beams");
    const std::string path = "$.beams[" + beam.label + "]";
    beam.wavelength_nm = number(b, "wavelength_nm", path);
    beam.origin_um = vec3(b, "origin_um", path);
    const Eigen::Vector3d aim = vec3(b, "aim_point_um", path);
    const Eigen::Vector3d d = aim - beam.origin_um;
    if (d.norm() <= 0.0)
      throw SchemaError(path + ": aim point coincides with origin");
    beam.direction = d.normalized();
    beam.focus_distance_focused_um = d.norm();
    beam.focus_distance_unfocused_um = d.norm();
    beam.waist_focused_um = 0.5 * number(b, "diameter_horizontal_um", path);
    beam.waist_unfocused_um = 0.5 * number(b, "diameter_vertical_um", path);
    if (beam.waist_focused_um <= 0 || beam.waist_unfocused_um <= 0)
      throw SchemaError(path + ": beam diameters must be > 0");
    if (b.contains("channel")) {
      const auto& ch = sc.channel(text(b, "channel", path));
      beam.power_w = delivered_power_mw(ch) * mW;
    } else {
      beam.power_w = number(b, "power_uw", path) * uW;
    }
    sc.beams.push_back(beam);
  }

  // Trap: explicit rectangles or the five-wire generator.
  {
    const json& t = require(root, "trap", "$");
    sc.trap.rf_omega = 2.0 * constants::pi * number(t, "rf_freq_mhz", "$.trap") * MHz;
    sc.trap.ion_mass_kg = number_or(t, "ion_mass_u", 88.0) * constants::amu;
    sc.axial_omega =
        2.0 * constants::pi * number(t, "axial_freq_mhz", "$.trap") * MHz;
    if (t.contains("patches")) {
      for (const auto& p : t.at("patches")) {
        ElectrodePatch ep;
        ep.name = text(p, "name", "$.trap.patches");
        const std::string path = "$.trap.patches[" + ep.name + "]";
        ep.x1 = number(p, "x1_um", path) * um;
        ep.x2 = number(p, "x2_um", path) * um;
        ep.y1 = number(p, "y1_um", path) * um;
        ep.y2 = number(p, "y2_um", path) * um;
        if (!(ep.x1 < ep.x2 && ep.y1 < ep.y2))
          throw SchemaError(path + ": rectangle must have x1<x2, y1<y2");
        const std::string role = text(p, "role", path);
        if (role == "rf") {
          ep.role = ElectrodeRole::RF;
          ep.voltage = number(p, "amplitude_v", path);
        } else if (role == "dc") {
          ep.role = ElectrodeRole::DC;
          ep.voltage = number_or(p, "voltage_v", 0.0);
        } else if (role == "ground") {
          ep.role = ElectrodeRole::Ground;
        } else {
          throw SchemaError(path + ": role must be rf|dc|ground");
        }
        sc.trap.patches.push_back(ep);
      }
    } else {
      const json& fw = require(t, "five_wire", "$.trap");
      TrapModel model = design_geometry(
          number(fw, "null_height_um", "$.trap.five_wire") * um,
          number_or(fw, "rail_aspect", 2.0),
          number_or(fw, "rail_length_um", 4000.0) * um,
          int(number_or(fw, "dc_segments_per_side", 5)),
          number_or(fw, "dc_pitch_um", 100.0) * um,
          number_or(fw, "dc_width_um", 100.0) * um);
      model.rf_omega = sc.trap.rf_omega;
      model.ion_mass_kg = sc.trap.ion_mass_kg;
      set_radial_frequency(
          model, 2.0 * constants::pi *
                     number(fw, "target_radial_mhz", "$.trap.five_wire") * MHz);
      sc.trap = model;
    }
    if (sc.trap.rf_indices().empty() || sc.trap.dc_indices().empty())
      throw SchemaError("$.trap: need at least one RF and one DC patch");
  }

  // Ion species and motional state.
  {
    const json& s = require(root, "species", "$");
    sc.species.mass_kg = number_or(s, "mass_u", 88.0) * constants::amu;
    sc.species.qubit_wavelength_nm =
        number_or(s, "qubit_wavelength_nm", 674.0);
    sc.species.d52_lifetime_s = number_or(s, "d52_lifetime_ms", 390.0) * ms;
    sc.species.quantizing_field_t =
        number_or(s, "quantizing_field_gauss", 4.3) * gauss;
    const json& mo = require(root, "motion", "$");
    sc.motion.nbar = number(mo, "nbar", "$.motion");
    sc.motion.mode_omega = sc.axial_omega;
    sc.motion.heating_rate_per_s = number_or(mo, "heating_rate_per_s", 0.0);
    sc.motion.lamb_dicke =
        lamb_dicke(sc.species, sc.motion.mode_omega,
                   number_or(mo, "projection_cosine", 1.0));
  }

  // Rabi calibration: the measured pi time anchors the reference rate at
  // the qubit beam's on-axis intensity.
  {
    const json& r = require(root, "rabi", "$");
    sc.rabi.reference_rabi_rad_s =
        constants::pi / (number(r, "pi_time_us", "$.rabi") * us);
    sc.rabi.reference_intensity_w_m2 =
        sc.peak_intensity(text(r, "beam", "$.rabi"));
  }

  // Fluorescence: collection and filter efficiency solved so the
  // calibration point reproduces the quoted detector rate.
  {
    const json& f = require(root, "fluorescence", "$");
    sc.fluor.i_sat_422_w_m2 = number(f, "i_sat_422_w_m2", "$.fluorescence");
    sc.fluor.i_sat_1092_w_m2 = number(f, "i_sat_1092_w_m2", "$.fluorescence");
    sc.free_space_repump_saturation =
        number_or(f, "free_space_repump_saturation", 0.25);
    const double target = number(f, "calibration_counts_per_s", "$.fluorescence");
    const double s1 =
        sc.peak_intensity("422") / sc.fluor.i_sat_422_w_m2;
    const double s2 = sc.free_space_repump_saturation;
    sc.fluor.max_detected_rate_per_s =
        target / ((s1 / (1.0 + s1)) * (s2 / (1.0 + s2)));
  }

  // Quench pulse calibrated for 50% on-peak survival; shelving proxy.
  {
    const json& q = require(root, "quench", "$");
    sc.quench_pulse_s = number(q, "pulse_us", "$.quench") * us;
    const double p_dark = number_or(q, "on_peak_dark_probability", 0.5);
    sc.quench_k_m2_per_w_s =
        -std::log(p_dark) /
        (sc.peak_intensity("1033") * sc.quench_pulse_s);
    const json& sh = require(root, "shelve", "$");
    sc.shelve_peak_probability =
        number_or(sh, "peak_dark_probability", 0.4);
    sc.shelve_peak_intensity_w_m2 = sc.peak_intensity("408");
  }

  // Detection.
  {
    const json& d = require(root, "detection", "$");
    sc.detection.ion_rate_per_s = number(d, "ion_rate_per_s", "$.detection");
    sc.detection.background_rate_per_s =
        number(d, "background_rate_per_s", "$.detection");
    sc.detection.window_s = number(d, "window_ms", "$.detection") * ms;
    sc.detection.d_lifetime_s = number(d, "d_lifetime_ms", "$.detection") * ms;
    if (sc.detection.window_s <= 0 || sc.detection.d_lifetime_s <= 0)
      throw SchemaError("$.detection: window and lifetime must be > 0");
  }

  // Vibration and the Ramsey sweep configuration.
  {
    const json& v = require(root, "vibration", "$");
    sc.vibration.amplitude_m = number(v, "amplitude_um", "$.vibration") * um;
    sc.vibration.vib_omega =
        2.0 * constants::pi * number(v, "frequency_hz", "$.vibration");
    sc.vibration.baseline_coherence_s =
        number(v, "baseline_coherence_us", "$.vibration") * us;
    sc.vibration.qubit_wavelength_nm = sc.species.qubit_wavelength_nm;
    const std::string del = text(v, "delivery", "$.vibration");
    if (del == "free_space")
      sc.vibration.delivery = Delivery::free_space;
    else if (del == "integrated")
      sc.vibration.delivery = Delivery::integrated;
    else
      throw SchemaError("$.vibration.delivery: must be free_space|integrated");

    const json& r = require(root, "ramsey", "$");
    sc.ramsey.sweep_points = int(number_or(r, "sweep_points", 6));
    sc.ramsey.shots_per_point = int(number_or(r, "shots_per_point", 1000));
    sc.ramsey.phases = int(number_or(r, "phases", 12));
    for (const auto& d : require(r, "delays_us", "$.ramsey"))
      sc.ramsey.delays_s.push_back(d.get<double>() * us);
    if (sc.ramsey.delays_s.size() < 2)
      throw SchemaError("$.ramsey.delays_us: need >= 2 delays");
  }
  {
    const json& s = require(root, "spectrum", "$");
    sc.spectrum_cfg.span_hz = number_or(s, "span_mhz", 2.0) * MHz;
    sc.spectrum_cfg.step_hz = number_or(s, "step_khz", 10.0) * 1e3;
    sc.spectrum_cfg.probe_s = number_or(s, "probe_us", 6.5) * us;
  }
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  json root;
  try {
    root = json::parse(bytes);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return load_scenario(root, scenario_detail::fnv1a64(bytes));
}

}  // namespace iontwin
