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

#include "iac/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "iac/io.hpp"

namespace iac {

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments (# or ;) outside of values is fine for this format
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv_[section.empty() ? key : section + "." + key] = val;
  }
}

void Config::load_file(const std::string& path) { parse(read_file(path), path); }

namespace {
std::string env_name_for(const std::string& key) {
  std::string out = "IAC_";
  for (char c : key) {
    if (c == '.' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}
}  // namespace

void Config::apply_env_overrides() {
  for (auto& [key, val] : kv_) {
    const char* env = std::getenv(env_name_for(key).c_str());
    if (env != nullptr) val = env;
  }
}

std::string Config::get_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_str(key);
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (...) {
  }
  throw ConfigError("config key " + key + " is not a number: '" + s + "'");
}

double Config::get_double(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

int Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError("config key " + key + " is not an integer");
  return i;
}

int Config::get_int(const std::string& key, int dflt) const {
  return has(key) ? get_int(key) : dflt;
}

long Config::get_long(const std::string& key, long dflt) const {
  if (!has(key)) return dflt;
  return static_cast<long>(get_double(key));
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string s = get_str(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: '" + s + "'");
}

Eigen::VectorXd Config::get_vec(const std::string& key) const {
  const std::string s = get_str(key);
  std::istringstream ss(s);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  std::string rest;
  ss.clear();
  std::getline(ss, rest);
  if (!trim(rest).empty())
    throw ConfigError("config key " + key + " has a non-numeric entry: '" + s + "'");
  Eigen::VectorXd out(static_cast<int>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out[static_cast<int>(i)] = vals[i];
  return out;
}

Eigen::VectorXd Config::get_vec(const std::string& key, const Eigen::VectorXd& dflt) const {
  return has(key) ? get_vec(key) : dflt;
}

Eigen::VectorXd Config::get_vec(const std::string& key, int size) const {
  Eigen::VectorXd v = get_vec(key);
  if (v.size() == 1 && size > 1) return Eigen::VectorXd::Constant(size, v[0]);
  if (v.size() != size)
    throw ConfigError("config key " + key + " must have " + std::to_string(size) + " entries");
  return v;
}

std::string Config::dump() const {
  std::ostringstream out;
  std::string cur_section;
  bool first = true;
  for (const auto& [key, val] : kv_) {
    const size_t dot = key.rfind('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != cur_section || first) {
      if (!first) out << "\n";
      out << "[" << section << "]\n";
      cur_section = section;
      first = false;
    }
    out << name << " = " << val << "\n";
  }
  return out.str();
}

Config load_config(const std::string& user_path) {
  Config cfg;
  cfg.parse(default_config_text(), "<defaults>");
  if (!user_path.empty()) cfg.load_file(user_path);
  cfg.apply_env_overrides();
  return cfg;
}

}  // namespace iac
