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

#include "iac/checkpoint.hpp"

#include <sstream>
#include <stdexcept>

#include "iac/io.hpp"

namespace iac {

namespace {

void write_vec(std::ostringstream& out, const std::string& key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << " " << format_double(v[i]);
  out << "\n";
}

Eigen::VectorXd parse_vec(std::istringstream& line, int expect) {
  Eigen::VectorXd v(expect);
  for (int i = 0; i < expect; ++i)
    if (!(line >> v[i])) throw std::runtime_error("checkpoint: truncated vector");
  return v;
}

}  // namespace

std::string Checkpoint::serialize() const {
  std::ostringstream out;
  out << "iac-checkpoint 1\n";
  out << "variant " << variant << "\n";
  out << "dim " << theta.dim() << "\n";
  out << "horizon " << theta.horizon() << "\n";
  out << "tied " << (theta.tied() ? 1 : 0) << "\n";
  write_vec(out, "lo", theta.lower());
  write_vec(out, "hi", theta.upper());
  out << "omega " << format_double(omega.slope) << " " << format_double(omega.bias) << " "
      << format_double(omega.slope_cap) << " " << format_double(omega.bias_cap) << "\n";
  out << "omega_target " << format_double(omega_target.slope) << " "
      << format_double(omega_target.bias) << " " << format_double(omega_target.slope_cap) << " "
      << format_double(omega_target.bias_cap) << "\n";
  for (int t = 0; t <= theta.horizon(); ++t)
    write_vec(out, "zeta " + std::to_string(t), theta.stage(t));
  for (int t = 0; t <= theta_target.horizon(); ++t)
    write_vec(out, "zeta_target " + std::to_string(t), theta_target.stage(t));
  return out.str();
}

Checkpoint Checkpoint::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iac-checkpoint ", 0) != 0)
    throw std::runtime_error("checkpoint: missing schema header");
  const int schema = std::stoi(line.substr(15));
  if (schema != 1) throw std::runtime_error("checkpoint: unsupported schema " + line);

  Checkpoint ck;
  int dim = -1, horizon = -1;
  bool tied = false;
  Eigen::VectorXd lo, hi;
  bool schedules_ready = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key.empty()) continue;
    if (key == "variant") {
      ls >> ck.variant;
    } else if (key == "dim") {
      ls >> dim;
    } else if (key == "horizon") {
      ls >> horizon;
    } else if (key == "tied") {
      int v = 0;
      ls >> v;
      tied = v != 0;
    } else if (key == "lo") {
      lo = parse_vec(ls, dim);
    } else if (key == "hi") {
      hi = parse_vec(ls, dim);
    } else if (key == "omega" || key == "omega_target") {
      Eigen::VectorXd v = parse_vec(ls, 4);
      RwfParams w{v[0], v[1], v[2], v[3]};
      (key == "omega" ? ck.omega : ck.omega_target) = w;
    } else if (key == "zeta" || key == "zeta_target") {
      if (!schedules_ready) {
        if (dim < 1 || horizon < 1 || lo.size() != dim || hi.size() != dim)
          throw std::runtime_error("checkpoint: schedule header incomplete");
        ck.theta = ParamSchedule(dim, horizon, lo, hi, tied);
        ck.theta_target = ck.theta;
        schedules_ready = true;
      }
      int t;
      ls >> t;
      Eigen::VectorXd v = parse_vec(ls, dim);
      (key == "zeta" ? ck.theta : ck.theta_target).set_stage(t, v);
    } else {
      throw std::runtime_error("checkpoint: unknown key '" + key + "'");
    }
  }
  if (!schedules_ready) throw std::runtime_error("checkpoint: no schedule data");
  return ck;
}

void Checkpoint::save(const std::string& path) const { write_file(path, serialize()); }

Checkpoint Checkpoint::load(const std::string& path) {
  return deserialize(read_file(path));
}

}  // namespace iac
