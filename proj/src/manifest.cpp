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

#include "iac/manifest.hpp"

#include <json.hpp>

#include "iac/io.hpp"

namespace iac {

std::string RunManifest::serialize() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["config_snapshot"] = config_snapshot;
  j["seed"] = seed;
  j["args"] = args;
  j["artifacts"] = artifacts;
  j["tool_version"] = tool_version;
  j["duration_sec"] = duration_sec;
  j["complete"] = complete;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::deserialize(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_path = j.value("config_path", "");
  m.config_snapshot = j.at("config_snapshot").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("args"))
    m.args = j.at("args").get<std::map<std::string, std::string>>();
  if (j.contains("artifacts"))
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  m.tool_version = j.value("tool_version", "");
  m.duration_sec = j.value("duration_sec", 0.0);
  m.complete = j.value("complete", false);
  return m;
}

void RunManifest::save(const std::string& path) const { write_file(path, serialize()); }

RunManifest RunManifest::load(const std::string& path) {
  return deserialize(read_file(path));
}

}  // namespace iac
