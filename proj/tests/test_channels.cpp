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

#include <doctest.h>

#include "iontwin/channels.hpp"
#include "test_fixture.hpp"

using namespace iontwin;
using iontwin_test::fixture;

TEST_CASE("ledger totals of the default scenario") {
  const Scenario& sc = fixture();
  CHECK(total_loss(sc.channel("422")) == doctest::Approx(35.0).epsilon(1e-12));
  CHECK(total_loss(sc.channel("461")) == doctest::Approx(31.5).epsilon(1e-12));
  CHECK(total_loss(sc.channel("674")) == doctest::Approx(31.4).epsilon(1e-12));
  CHECK(total_loss(sc.channel("1092")) == doctest::Approx(26.4).epsilon(1e-12));
}

TEST_CASE("delivered power follows the decibel attenuation") {
  const Scenario& sc = fixture();
  const OpticalChannel& red = sc.channel("674");
  // Independent oracle: 10 mW attenuated by 31.4 dB.
  const double expected_uw = 10.0 * std::pow(10.0, -31.4 / 10.0) * 1e3;
  CHECK(delivered_power_uw(red) == doctest::Approx(expected_uw).epsilon(1e-12));
  CHECK(delivered_power_uw(red) == doctest::Approx(7.2444).epsilon(1e-4));
  // Zero input power delivers zero.
  OpticalChannel dark = red;
  dark.fiber_power_mw = 0.0;
  CHECK(delivered_power_mw(dark) == 0.0);
}

TEST_CASE("decibel conversions round trip") {
  for (double db : {0.0, 0.4, 3.0, 10.0, 26.4, 35.0, 60.0}) {
    CHECK(linear_to_db(db_to_linear(db)) == doctest::Approx(db).epsilon(1e-12));
  }
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(10.0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("propagation loss is rate times length") {
  CHECK(propagation_loss_db(0.53, 0.75) ==
        doctest::Approx(0.3975).epsilon(1e-12));
  CHECK(propagation_loss_db(0.0, 10.0) == 0.0);
}

TEST_CASE("ledger consistency check on the routed channel") {
  const Scenario& sc = fixture();
  CHECK(ledger_consistent(sc.channel("674").ledger));
  // A ledger with no recorded routing length is vacuously consistent.
  CHECK(ledger_consistent(sc.channel("422").ledger));
  // A contradictory rate fails the check.
  LossLedger bad = sc.channel("674").ledger;
  bad.propagation_rate_db_per_cm = 2.0;
  CHECK_FALSE(ledger_consistent(bad));
}

TEST_CASE("empty ledger is rejected") {
  OpticalChannel ch;
  ch.label = "empty";
  ch.fiber_power_mw = 1.0;
  CHECK_THROWS_AS(total_loss(ch), ModelError);
}

TEST_CASE("inferred entries are carried as provenance") {
  const Scenario& sc = fixture();
  int inferred = 0;
  for (const auto& e : sc.channel("1092").ledger.entries)
    if (e.inferred) ++inferred;
  CHECK(inferred == 2);
  for (const auto& e : sc.channel("674").ledger.entries)
    CHECK_FALSE(e.inferred);
}
