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
#include <cstdint>
#include <string>
#include <vector>

namespace iac {

/// One offline tuple (s, a, r, s') with its position inside the episode.
struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  long t = 0;  // timestep within the episode
  int episode_id = 0;
};

struct Dataset {
  std::vector<Transition> transitions;
  int n_s = 0;
  int n_a = 0;
  int horizon = 0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(transitions.size()); }
  bool empty() const { return transitions.empty(); }

  /// True when `i` is the last transition of its episode.
  bool episode_end(int i) const {
    return i + 1 >= size() ||
           transitions[i + 1].episode_id != transitions[i].episode_id;
  }

  void validate() const;  // finiteness + episode monotonicity

  /// CSV with header (episode_id, t, s[...], a[...], r, s_next[...]) plus a
  /// JSON sidecar <path>.meta.json carrying dimensions and the seed.
  void save_csv(const std::string& path, const std::string& tool_version) const;
  static Dataset load_csv(const std::string& path);
};

}  // namespace iac
