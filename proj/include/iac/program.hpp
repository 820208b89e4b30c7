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

#include <memory>
#include <stdexcept>
#include <string>

#include "iac/schedule.hpp"
#include "iac/solver.hpp"
#include "iac/staged.hpp"

namespace iac {

/// Diagonal regularizer added to every stage objective so the solution is
/// unique even for linear stage rewards (reward gets -kUniquenessReg*|v|^2).
inline constexpr double kUniquenessReg = 1e-8;

/// Adds the uniqueness regularizer to a minimization-form block.
void add_uniqueness_reg(StageBlock& s);
void add_uniqueness_reg(TerminalBlock& t);

/// Appends box rows lo <= w <= hi to (Cpart, ub) for the x- or u-part of a
/// stage. Infinite bounds are skipped.
void append_box_rows(Eigen::MatrixXd& Cx, Eigen::MatrixXd& Cu, Eigen::VectorXd& ub, bool on_state,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int nx, int nu);

/// A parametric family of finite-horizon concave-reward programs: the actor
/// optimization and its fixed-first-action (critic) variant. Implementations
/// assemble numeric instances for a schedule and expose the derivatives of
/// the stage rewards with respect to the stage parameter; parameters enter
/// the objectives only, so these hooks are exactly the Lagrangian parameter
/// derivatives needed for envelope gradients and KKT sensitivities.
class LookaheadProgram {
 public:
  virtual ~LookaheadProgram() = default;

  virtual int obs_dim() const = 0;     // observation accepted by instance builders
  virtual int state_dim() const = 0;   // internal program state n_x
  virtual int action_dim() const = 0;  // n_u
  virtual int param_dim() const = 0;   // d
  virtual int horizon() const = 0;     // T

  /// Receding-horizon instance at global time t covering [t, horizon_end(t)];
  /// stage i maps to schedule column (t % T) + i, terminal to column T.
  virtual StagedInstance actor_instance(const Eigen::VectorXd& obs, const ParamSchedule& theta,
                                        long t) const = 0;

  /// Full-horizon instance with the first action pinned to a0 (assembled at
  /// t = 0 and reduced by substitution). `feas` reports stage-0 feasibility
  /// of the pinned pair.
  StagedInstance critic_instance(const Eigen::VectorXd& obs, const Eigen::VectorXd& a0,
                                 const ParamSchedule& theta, PinFeasibility* feas) const {
    return pin_first_action(actor_instance(obs, theta, 0), a0, feas);
  }

  /// d reward / d zeta_slot at (x, u); for the terminal stage u is ignored.
  virtual Eigen::VectorXd reward_param_grad(const ParamSchedule& theta, int slot,
                                            const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                            bool terminal) const = 0;

  /// d (grad_{[x;u]} reward) / d zeta_slot, (nx+nu) x d (terminal: nx x d).
  virtual Eigen::MatrixXd reward_param_cross(const ParamSchedule& theta, int slot,
                                             const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                             bool terminal) const = 0;

  /// Per-coordinate action box (used to clamp dataset actions before pinning).
  virtual Eigen::VectorXd action_lower() const = 0;
  virtual Eigen::VectorXd action_upper() const = 0;

  /// Deterministic observation update under the program's own stage-0
  /// dynamics (used to roll closed-loop trajectories in the sensitivity
  /// lab). The default requires obs_dim == state_dim; programs with a wider
  /// observation override it.
  virtual Eigen::VectorXd next_obs(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                                   const ParamSchedule& theta, long t) const;

  Eigen::VectorXd clamp_action(const Eigen::VectorXd& a) const {
    return a.cwiseMax(action_lower()).cwiseMin(action_upper());
  }
};

/// Raised when a solve that must succeed does not.
class SolveError : public std::runtime_error {
 public:
  SolveError(SolveStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

/// Solves the actor optimization at global time t and returns the full
/// primal-dual result; the executed action is result.first_action().
SolveResult solve_actor(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                        const ParamSchedule& theta, long t, const SolveOptions& opts = {});

/// Optimal value of the fixed-first-action program (the critic's inner
/// optimization). Throws SolveError{Infeasible} when (obs, a0) violate the
/// stage-0 constraints; callers clamp dataset actions into the action box
/// first. When `solved` is non-null the reduced-program solution is stored
/// there (used to reuse the solve for gradients).
double optimal_value(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                     const Eigen::VectorXd& a0, const ParamSchedule& theta,
                     const SolveOptions& opts = {}, SolveResult* solved = nullptr);

struct ValueGradient {
  Eigen::VectorXd grad;    // d(T+1), stage-major
  bool degenerate = false; // strict complementarity margin below threshold
  double strict_comp_margin = 0.0;
};

/// Strict-complementarity margin below which gradients are flagged
/// degenerate and callers fall back to finite differences.
inline constexpr double kDegeneracyTol = 1e-7;

/// Envelope (Danskin) gradient of the optimal value with respect to the flat
/// parameter vector, evaluated from a solved instance: the stage-reward
/// parameter derivatives at the optimal trajectory, scattered into the
/// schedule slots the instance used.
ValueGradient envelope_gradient(const LookaheadProgram& prog, const ParamSchedule& theta,
                                const StagedInstance& inst, const SolveResult& res);

/// Gradient of optimal_value(obs, a0, theta) w.r.t. theta (pinned program).
ValueGradient value_gradient(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                             const Eigen::VectorXd& a0, const ParamSchedule& theta,
                             const SolveOptions& opts = {});

struct Sensitivity {
  Eigen::MatrixXd jac;  // n_a x d(T+1): d first_action / d theta
  bool degenerate = false;  // LICQ or strict complementarity failed
  std::string note;
};

/// Jacobian of the actor solution function at (obs, t) by implicit
/// differentiation of the KKT system restricted to the active set.
Sensitivity solution_sensitivity(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                 const ParamSchedule& theta, long t,
                                 const SolveOptions& opts = {});

/// Central finite differences of the pinned optimal value w.r.t. theta
/// (fallback path when envelope gradients are flagged degenerate). When
/// `coords` is non-empty only those flat coordinates are differenced.
Eigen::VectorXd value_gradient_fd(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                  const Eigen::VectorXd& a0, const ParamSchedule& theta,
                                  double step = 1e-5, const std::vector<int>& coords = {});

/// Central finite differences of the receding-horizon optimal value at time t.
Eigen::VectorXd actor_value_gradient_fd(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                        const ParamSchedule& theta, long t, double step = 1e-5,
                                        const std::vector<int>& coords = {});

}  // namespace iac
