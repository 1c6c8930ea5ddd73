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

#include "iontwin/scenario.hpp"

namespace iontwin_test {

/// Shared default scenario, loaded once per test binary.
inline const iontwin::Scenario& fixture() {
  static const iontwin::Scenario sc =
      iontwin::load_scenario_file(IONTWIN_SCENARIO_PATH);
  return sc;
}

}  // namespace iontwin_test
