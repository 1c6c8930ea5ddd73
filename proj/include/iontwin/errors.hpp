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

#include <stdexcept>
#include <string>

namespace iontwin {

/// Base for all numerical/model failures; the CLI maps these to exit 2.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define IONTWIN_DEFINE_ERROR(Name)              \
  struct Name : ModelError {                    \
    explicit Name(const std::string& msg)       \
        : ModelError(std::string(#Name ": ") + msg) {} \
  }

IONTWIN_DEFINE_ERROR(NoGuidedMode);
IONTWIN_DEFINE_ERROR(Evanescent);
IONTWIN_DEFINE_ERROR(Unreachable);
IONTWIN_DEFINE_ERROR(NonIntersecting);
IONTWIN_DEFINE_ERROR(OnSurface);
IONTWIN_DEFINE_ERROR(NoNull);
IONTWIN_DEFINE_ERROR(Infeasible);
IONTWIN_DEFINE_ERROR(RatioOutOfRange);
IONTWIN_DEFINE_ERROR(DegenerateFit);
IONTWIN_DEFINE_ERROR(DegenerateTrack);
IONTWIN_DEFINE_ERROR(FitFailure);
IONTWIN_DEFINE_ERROR(InsufficientStatistics);

#undef IONTWIN_DEFINE_ERROR

/// Scenario schema problems; the CLI maps these to exit 1.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace iontwin
