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

#include <cstdint>
#include <map>
#include <string>

namespace iac {

/// Record of one CLI run: the resolved configuration snapshot, seed and
/// argument values, and the artifacts produced. Re-running a command from
/// its manifest reproduces the artifacts byte-exactly (the manifest itself
/// carries volatile fields like the wall-clock duration).
struct RunManifest {
  std::string command;
  std::string config_path;      // as given on the command line ("" = defaults)
  std::string config_snapshot;  // canonical dump of the resolved config
  std::uint64_t seed = 0;
  std::map<std::string, std::string> args;       // command-specific settings
  std::map<std::string, std::string> artifacts;  // name -> filename (relative)
  std::string tool_version;
  double duration_sec = 0.0;
  bool complete = false;

  std::string serialize() const;
  static RunManifest deserialize(const std::string& text);
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

}  // namespace iac
