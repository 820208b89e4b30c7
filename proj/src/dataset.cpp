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

#include "iac/dataset.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "iac/io.hpp"

namespace iac {

void Dataset::validate() const {
  int last_ep = -1;
  for (int i = 0; i < size(); ++i) {
    const Transition& tr = transitions[i];
    if (tr.s.size() != n_s || tr.s_next.size() != n_s)
      throw std::runtime_error("dataset: state size mismatch at row " + std::to_string(i));
    if (tr.a.size() != n_a)
      throw std::runtime_error("dataset: action size mismatch at row " + std::to_string(i));
    if (!tr.s.allFinite() || !tr.a.allFinite() || !tr.s_next.allFinite() || !std::isfinite(tr.r))
      throw std::runtime_error("dataset: non-finite entry at row " + std::to_string(i));
    if (tr.episode_id < last_ep)
      throw std::runtime_error("dataset: episode ids must be non-decreasing");
    last_ep = tr.episode_id;
  }
}

void Dataset::save_csv(const std::string& path, const std::string& tool_version) const {
  std::ostringstream out;
  out << "# " << tool_version << "\n";
  out << "episode_id,t";
  for (int j = 0; j < n_s; ++j) out << ",s" << j;
  for (int j = 0; j < n_a; ++j) out << ",a" << j;
  out << ",r";
  for (int j = 0; j < n_s; ++j) out << ",s_next" << j;
  out << "\n";
  for (const Transition& tr : transitions) {
    out << tr.episode_id << "," << tr.t;
    for (int j = 0; j < n_s; ++j) out << "," << format_double(tr.s[j]);
    for (int j = 0; j < n_a; ++j) out << "," << format_double(tr.a[j]);
    out << "," << format_double(tr.r);
    for (int j = 0; j < n_s; ++j) out << "," << format_double(tr.s_next[j]);
    out << "\n";
  }
  write_file(path, out.str());

  nlohmann::ordered_json meta;
  meta["n_s"] = n_s;
  meta["n_a"] = n_a;
  meta["horizon"] = horizon;
  meta["seed"] = seed;
  meta["rows"] = size();
  meta["tool_version"] = tool_version;
  write_file(path + ".meta.json", meta.dump(2) + "\n");
}

Dataset load_csv_impl(const std::string& path) {
  Dataset ds;
  const auto meta = nlohmann::json::parse(read_file(path + ".meta.json"));
  ds.n_s = meta.at("n_s").get<int>();
  ds.n_a = meta.at("n_a").get<int>();
  ds.horizon = meta.at("horizon").get<int>();
  ds.seed = meta.at("seed").get<std::uint64_t>();

  std::istringstream in(read_file(path));
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    const size_t want = 2 + 2 * ds.n_s + ds.n_a + 1;
    if (f.size() != want)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(want) + " fields, got " + std::to_string(f.size()));
    Transition tr;
    size_t k = 0;
    tr.episode_id = std::stoi(f[k++]);
    tr.t = std::stol(f[k++]);
    tr.s.resize(ds.n_s);
    for (int j = 0; j < ds.n_s; ++j) tr.s[j] = std::stod(f[k++]);
    tr.a.resize(ds.n_a);
    for (int j = 0; j < ds.n_a; ++j) tr.a[j] = std::stod(f[k++]);
    tr.r = std::stod(f[k++]);
    tr.s_next.resize(ds.n_s);
    for (int j = 0; j < ds.n_s; ++j) tr.s_next[j] = std::stod(f[k++]);
    ds.transitions.push_back(std::move(tr));
  }
  ds.validate();
  return ds;
}

Dataset Dataset::load_csv(const std::string& path) { return load_csv_impl(path); }

}  // namespace iac
