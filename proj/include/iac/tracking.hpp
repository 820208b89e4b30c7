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

/// Coupled tracking MPC with integrator dynamics x' = a x + b u:
/// stage reward -wx|x - zeta[0:m]|^2 - wu|u - zeta[m:2m]|^2, terminal
/// -wt|x - zeta_T[0:m]|^2. The per-stage parameter is the pair of tracking
/// targets, d = 2m. This is the reference instance for the sensitivity lab
/// and the synthetic-instance format accepted by the CLI.
struct TrackingSpec {
  int m = 1;          // state/action dimension
  int T = 20;         // horizon
  double wx = 1.0;    // state tracking weight
  double wu = 1.0;    // action tracking weight
  double wt = 1.0;    // terminal weight
  double a_dyn = 1.0; // dynamics x' = a x + b u
  double b_dyn = 1.0;
  double x_lo = -50.0, x_hi = 50.0;
  double u_lo = -10.0, u_hi = 10.0;
  double zeta_lo = -5.0, zeta_hi = 5.0;  // schedule box
};

class TrackingProgram : public LookaheadProgram {
 public:
  explicit TrackingProgram(const TrackingSpec& spec) : s_(spec) {}

  int obs_dim() const override { return s_.m; }
  int state_dim() const override { return s_.m; }
  int action_dim() const override { return s_.m; }
  int param_dim() const override { return 2 * s_.m; }
  int horizon() const override { return s_.T; }

  StagedInstance actor_instance(const Eigen::VectorXd& obs, const ParamSchedule& theta,
                                long t) const override;

  Eigen::VectorXd reward_param_grad(const ParamSchedule& theta, int slot, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u, bool terminal) const override;
  Eigen::MatrixXd reward_param_cross(const ParamSchedule& theta, int slot, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u, bool terminal) const override;

  Eigen::VectorXd action_lower() const override {
    return Eigen::VectorXd::Constant(s_.m, s_.u_lo);
  }
  Eigen::VectorXd action_upper() const override {
    return Eigen::VectorXd::Constant(s_.m, s_.u_hi);
  }

  /// Schedule with the spec's parameter box.
  ParamSchedule make_schedule(bool tied = false) const {
    return ParamSchedule(param_dim(), s_.T, Eigen::VectorXd::Constant(param_dim(), s_.zeta_lo),
                         Eigen::VectorXd::Constant(param_dim(), s_.zeta_hi), tied);
  }

  const TrackingSpec& spec() const { return s_; }

 private:
  TrackingSpec s_;
};

}  // namespace iac
