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

#include <cstdint>
#include <string>
#include <vector>

#include "iac/staged.hpp"

namespace iac {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

std::string to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-10;       // residual tolerance, scaled by problem data
  double tol_comp = 1e-12;  // duality measure tolerance, scaled
  int max_iter = 100;
  bool use_riccati = true;  // false selects the dense reference backend
  // Optional initial action trajectory (nu x L); states are rolled from it.
  const Eigen::MatrixXd* init_actions = nullptr;
};

/// Primal-dual solution of one staged instance. Values are in reward
/// (maximization) convention; duals and residuals refer to the solved
/// minimization form. For a pinned instance `actions`/`states` cover the
/// reduced tail program only.
struct SolveResult {
  SolveStatus status = SolveStatus::MaxIter;
  Eigen::MatrixXd actions;          // nu x L
  Eigen::MatrixXd states;           // nx x (L+1), column 0 = x0
  double optimal_value = 0.0;       // maximized reward, includes constants
  Eigen::VectorXd ineq_duals;       // >= 0, row order: stage 0..L-1, terminal
  Eigen::VectorXd eq_duals;         // dynamics multipliers, nx*L
  std::vector<std::uint8_t> active_set;
  double kkt_residual = 0.0;        // max of the component residuals
  double r_stationarity = 0.0;
  double r_primal_eq = 0.0;
  double r_primal_ineq = 0.0;
  double r_comp = 0.0;
  int iterations = 0;
  /// min over inequality rows of max(slack, dual): the strict-complementarity
  /// margin used for degeneracy detection.
  double min_strict_comp = 0.0;

  Eigen::VectorXd first_action() const {
    return actions.cols() > 0 ? Eigen::VectorXd(actions.col(0)) : Eigen::VectorXd();
  }
};

/// Solves a staged concave-reward instance with a primal-dual interior-point
/// method (Mehrotra predictor-corrector). The Newton systems are solved
/// either by a stagewise Riccati elimination (production path) or by a dense
/// KKT factorization (reference path kept for testing); both backends share
/// the same IPM driver and produce the same iterates up to roundoff.
SolveResult solve(const StagedInstance& inst, const SolveOptions& opts = {});

}  // namespace iac
