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

#include "iac/program.hpp"

namespace iac {

/// Affine reward-warping function psi(phi) = slope * phi + bias with
/// 0 <= slope <= slope_cap and |bias| <= bias_cap (the compact Omega).
/// The warp is monotone non-decreasing, strictly increasing for slope > 0,
/// and Lipschitz in phi with constant slope.
struct RwfParams {
  double slope = 1.0;
  double bias = 0.0;
  double slope_cap = 1e3;
  double bias_cap = 1e6;

  void validate() const {
    if (!(slope >= 0.0 && slope <= slope_cap))
      throw std::invalid_argument("RwfParams: slope outside [0, slope_cap]");
    if (!(bias >= -bias_cap && bias <= bias_cap))
      throw std::invalid_argument("RwfParams: bias outside box");
  }
  RwfParams clamped() const {
    RwfParams w = *this;
    w.slope = std::min(std::max(0.0, w.slope), w.slope_cap);
    w.bias = std::min(std::max(-w.bias_cap, w.bias), w.bias_cap);
    return w;
  }
};

inline double rwf_eval(double phi, const RwfParams& w) { return w.slope * phi + w.bias; }

struct CriticEval {
  double value = 0.0;  // slope*phi + bias, exactly
  double phi = 0.0;    // inner optimal value
  // provenance
  Eigen::VectorXd s, a;
};

/// f(s, a) = psi(phi(s, a; theta); omega): the pinned optimal value warped.
CriticEval critic_eval(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                       const Eigen::VectorXd& action, const ParamSchedule& theta,
                       const RwfParams& w, const SolveOptions& opts = {});

/// Scales a minimization-form instance so its reward is psi(reward) for the
/// affine warp w (requires slope > 0 to preserve convexity).
StagedInstance warp_instance(const StagedInstance& inst, const RwfParams& w);

/// Solves the program and its warped version and checks that the first
/// actions agree within `tol` (monotone warps leave the argmax invariant).
bool argmax_invariance_check(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                             const ParamSchedule& theta, const RwfParams& w, double tol = 1e-6,
                             const SolveOptions& opts = {});

}  // namespace iac
