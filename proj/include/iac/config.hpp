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

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace iac {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& w) : std::runtime_error(w) {}
};

/// Sectioned key-value configuration:
///
///   [section]
///   key = value            # scalar, word or space-separated vector
///
/// Keys are addressed as "section.key". Later assignments win, so overlaying
/// a user file onto the built-in defaults is a plain re-parse. Environment
/// variables IAC_<SECTION>_<KEY> (dots/dashes as underscores, uppercase)
/// override file values 1:1.
class Config {
 public:
  Config() = default;

  /// Parses `text` into this config (overlaying existing keys). `origin`
  /// appears in error messages.
  void parse(const std::string& text, const std::string& origin = "<config>");
  void load_file(const std::string& path);
  void apply_env_overrides();  // IAC_* variables

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int dflt) const;
  long get_long(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  Eigen::VectorXd get_vec(const std::string& key) const;
  Eigen::VectorXd get_vec(const std::string& key, const Eigen::VectorXd& dflt) const;
  /// Vector with a required size.
  Eigen::VectorXd get_vec(const std::string& key, int size) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  /// Canonical serialization of the resolved key-value map (sorted sections);
  /// parsing it back yields an identical config. Used for manifest snapshots.
  std::string dump() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

/// The built-in reference configuration (same content as configs/default.ini).
const std::string& default_config_text();

/// defaults + optional user file + environment overrides.
Config load_config(const std::string& user_path = "");

}  // namespace iac
