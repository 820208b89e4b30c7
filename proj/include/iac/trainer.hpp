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

#include <functional>
#include <optional>

#include "iac/critic.hpp"
#include "iac/dataset.hpp"
#include "iac/program.hpp"

namespace iac {

enum class Variant { IacStar, IacRp, WIac };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct TrainConfig {
  double beta = 1.0;        // pessimism weight
  double gamma = 0.99;      // discount
  double actor_lr = 0.015;
  double target_mix = 0.25; // alpha: target <- alpha*target + (1-alpha)*new
  double td_lambda = 0.95;
  int iterations = 200;     // K
  int inner_steps = 5;      // gradient-ascent steps realizing each actor update
  Variant variant = Variant::IacRp;
  double w_decay = 0.9;     // W-iAC per-stage weighting
  std::uint64_t seed = 0;
  double slope_cap = 1e3;
  double bias_cap = 1e6;
  bool fd_fallback = true;  // finite-difference fallback on degenerate gradients
  SolveOptions solve;

  void validate() const;
};

struct IterationDiag {
  int iteration = 0;
  double loss_L = 0.0;
  double loss_E = 0.0;
  double bellman_residual = 0.0;
  std::optional<double> eval_return_mean;
  std::optional<double> eval_return_std;
};

struct TrainState {
  ParamSchedule theta, theta_target;
  RwfParams omega, omega_target;
  int iteration = 0;
  std::vector<IterationDiag> diagnostics;
  // Adam moments over the effective parameter space
  Eigen::VectorXd adam_m, adam_v;
  long adam_steps = 0;
};

/// Pinned optimal values over the dataset at a fixed theta, evaluated in
/// parallel into per-sample slots (reductions happen serially in index order
/// so results are independent of the thread count).
struct BatchValues {
  std::vector<double> phi_data;  // phi(s_i, a_i)
  std::vector<double> phi_pol;   // phi(s_i, pi_theta(s_i))
  std::vector<double> phi_next;  // phi(s'_i, pi_theta(s'_i))
};

BatchValues evaluate_batch(const LookaheadProgram& prog, const Dataset& ds,
                           const ParamSchedule& theta, const SolveOptions& opts = {});

/// Backward lambda-returns per episode with the target critic; td_lambda = 0
/// reduces to the one-step TD target r + gamma f_target(s', pi(s')).
std::vector<double> lambda_returns(const Dataset& ds, const BatchValues& batch,
                                   const RwfParams& target, double gamma, double td_lambda);

/// Empirical pessimism gap (1/n) sum f(s, pi(s)) - f(s, a).
double loss_L(const LookaheadProgram& prog, const Dataset& ds, const ParamSchedule& theta,
              const RwfParams& w, const SolveOptions& opts = {});

/// Empirical Bellman regression loss (1/n) sum (f(s,a) - y)^2 with lambda
/// targets built from the target critic.
double loss_E(const LookaheadProgram& prog, const Dataset& ds, const ParamSchedule& theta,
              const RwfParams& w, const RwfParams& w_target, double gamma, double td_lambda,
              const SolveOptions& opts = {});

struct CriticFit {
  RwfParams omega;
  bool singular = false;  // all phi identical: previous omega retained
  // moments of the fitted box-QP, kept for oracle tests
  double m_phi = 0, m_phi2 = 0, m_y = 0, m_phiy = 0, g_L = 0;
};

/// Closed-form minimizer of L_D(theta, omega) + beta E_D(theta, omega) over
/// the box Omega (the objective is a convex quadratic in (slope, bias)).
/// IacStar drops the L_D term.
CriticFit critic_update_closed_form(const BatchValues& batch, const std::vector<double>& targets,
                                    Variant variant, double beta, const RwfParams& prev);

/// Gradient of L_D with respect to the flat parameter vector: per-sample
/// envelope gradients of the receding-horizon value minus the pinned value,
/// scaled by the critic slope. Throws on non-finite gradients with the
/// offending sample index in the message.
Eigen::VectorXd actor_loss_gradient(const LookaheadProgram& prog, const Dataset& ds,
                                    const ParamSchedule& theta, const RwfParams& w,
                                    const TrainConfig& cfg);

class Trainer {
 public:
  /// `prototype` supplies the schedule box, tie flag and dimensions; train()
  /// starts from its box center.
  Trainer(const LookaheadProgram& prog, const Dataset& ds, TrainConfig cfg,
          ParamSchedule prototype);

  /// Initial state: theta at the center of the box, identity warp.
  TrainState initial_state() const;

  /// Eq.-style alternating loop: critic fit first at every iteration k in
  /// [0, K], actor update for k < K. Returns the final state with one
  /// diagnostics row per iteration. `evaluator`, when set and eval_every > 0,
  /// fills the eval columns every eval_every iterations (and at the last).
  using Evaluator = std::function<std::pair<double, double>(const ParamSchedule&)>;
  TrainState train(const Evaluator& evaluator = {}, int eval_every = 0);

  /// One critic update (Eq.-style pessimistic fit) on `st`; returns the new
  /// omega and mixes the target.
  CriticFit critic_update(TrainState& st);
  /// One actor update (inner_steps projected Adam ascent steps) on `st`;
  /// mixes the actor target afterwards.
  void actor_update(TrainState& st);

  const TrainConfig& config() const { return cfg_; }

 private:
  Eigen::VectorXd effective_gradient(const Eigen::VectorXd& flat) const;
  void adam_step(TrainState& st, const Eigen::VectorXd& g_eff);

  const LookaheadProgram& prog_;
  const Dataset& ds_;
  TrainConfig cfg_;
  ParamSchedule proto_;
  // batch cache for diagnostics within an iteration
  BatchValues batch_;
  std::vector<double> targets_;
};

/// Diagnostics CSV (header + one row per iteration).
std::string diagnostics_csv(const std::vector<IterationDiag>& diags, const std::string& version);

}  // namespace iac
