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

#include "iac/critic.hpp"

namespace iac {

CriticEval critic_eval(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                       const Eigen::VectorXd& action, const ParamSchedule& theta,
                       const RwfParams& w, const SolveOptions& opts) {
  w.validate();
  CriticEval out;
  out.s = obs;
  out.a = action;
  out.phi = optimal_value(prog, obs, action, theta, opts);
  out.value = rwf_eval(out.phi, w);
  return out;
}

StagedInstance warp_instance(const StagedInstance& inst, const RwfParams& w) {
  if (!(w.slope > 0.0))
    throw std::invalid_argument("warp_instance: slope must be strictly positive");
  StagedInstance out = inst;
  for (auto& s : out.stages) {
    s.H *= w.slope;
    s.q *= w.slope;
  }
  out.term.H *= w.slope;
  out.term.q *= w.slope;
  // reward' = slope*reward + bias  =>  cost' = slope*cost - bias
  out.cost_offset = w.slope * inst.cost_offset - w.bias;
  return out;
}

bool argmax_invariance_check(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                             const ParamSchedule& theta, const RwfParams& w, double tol,
                             const SolveOptions& opts) {
  if (!(w.slope > 0.0))
    throw std::invalid_argument("argmax_invariance_check: requires slope > 0");
  const StagedInstance plain = prog.actor_instance(obs, theta, 0);
  const StagedInstance warped = warp_instance(plain, w);
  const SolveResult a = solve(plain, opts);
  const SolveResult b = solve(warped, opts);
  if (a.status != SolveStatus::Optimal)
    throw SolveError(a.status, "argmax_invariance_check: base solve failed");
  if (b.status != SolveStatus::Optimal)
    throw SolveError(b.status, "argmax_invariance_check: warped solve failed");
  const double diff = (a.first_action() - b.first_action()).lpNorm<Eigen::Infinity>();
  return diff <= tol;
}

}  // namespace iac
