/*
Copyright 2025 the iac authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <string>

#include "iac/critic.hpp"
#include "iac/schedule.hpp"

namespace iac {

/// Serialized actor/critic parameters (live + target) as structured text
/// with a schema version. Doubles round-trip exactly.
struct Checkpoint {
  ParamSchedule theta, theta_target;
  RwfParams omega, omega_target;
  std::string variant = "iac-rp";

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& text);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace iac
