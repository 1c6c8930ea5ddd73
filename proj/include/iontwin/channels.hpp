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
#include <string>
#include <vector>

#include "iontwin/errors.hpp"

namespace iontwin {

/// Stages of the delivery chain, fiber to emitted beam.
enum class LossStage {
  on_chip_coupling,
  propagation,
  grating,
  fiber_feedthrough,
  cooldown,
};

inline const char* to_string(LossStage s) {
  switch (s) {
    case LossStage::on_chip_coupling: return "on_chip_coupling";
    case LossStage::propagation: return "propagation";
    case LossStage::grating: return "grating";
    case LossStage::fiber_feedthrough: return "fiber_feedthrough";
    case LossStage::cooldown: return "cooldown";
  }
  return "?";
}

struct LossEntry {
  LossStage stage;
  double loss_db;
  bool inferred = false;  // value not measured directly, carried as provenance
};

/// Ordered decibel ledger for one wavelength pathway.  Losses stay in dB so
/// tabulated values are exact; conversion to linear happens at evaluation.
struct LossLedger {
  std::vector<LossEntry> entries;
  double propagation_length_cm = 0.0;
  double propagation_rate_db_per_cm = 0.0;
};

struct GratingSpec;  // see photonics.hpp

struct OpticalChannel {
  std::string label;
  double wavelength_nm = 0.0;
  double fiber_power_mw = 0.0;
  double waveguide_width_nm = 0.0;
  LossLedger ledger;
  std::string grating;  // name of the shared GratingSpec in the scenario
};

inline double db_to_linear(double db) { return std::pow(10.0, -db / 10.0); }
inline double linear_to_db(double t) { return -10.0 * std::log10(t); }

/// Sum of the ledger entries in dB.
inline double total_loss(const OpticalChannel& ch) {
  if (ch.ledger.entries.empty())
    throw ModelError("total_loss: empty ledger for channel " + ch.label);
  double sum = 0.0;
  for (const auto& e : ch.ledger.entries) sum += e.loss_db;
  return sum;
}

/// Power emitted toward the ion, in the same unit as the fiber power.
inline double delivered_power_mw(const OpticalChannel& ch) {
  return ch.fiber_power_mw * db_to_linear(total_loss(ch));
}

inline double delivered_power_uw(const OpticalChannel& ch) {
  return delivered_power_mw(ch) * 1e3;
}

inline double propagation_loss_db(double rate_db_per_cm, double length_cm) {
  return rate_db_per_cm * length_cm;
}

/// The ledger's propagation entry must agree with rate x length when a
/// routing length is recorded.
inline bool ledger_consistent(const LossLedger& ledger, double tol_db = 0.05) {
  if (ledger.propagation_length_cm <= 0.0) return true;
  for (const auto& e : ledger.entries) {
    if (e.stage == LossStage::propagation) {
      const double expected = propagation_loss_db(
          ledger.propagation_rate_db_per_cm, ledger.propagation_length_cm);
      return std::abs(e.loss_db - expected) <= tol_db;
    }
  }
  return true;
}

}  // namespace iontwin
