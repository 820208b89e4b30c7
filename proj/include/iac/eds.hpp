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

#include <utility>
#include <vector>

#include "iac/program.hpp"

namespace iac::eds {

/// Fitted exponential-decay model for one perturbation experiment:
/// displacement(gap) ~ H_hat * lambda_hat^gap * |delta|.
struct EdsEstimate {
  double H_hat = 1.0;
  double lambda_hat = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<int, double>> curve;  // (time gap, displacement)
  int stage = 0;
  double delta_norm = 0.0;
  bool all_zero = false;   // perturbation never reached the solution
  bool h_clamped = false;  // fitted amplitude was below 1 and clamped
};

/// Perturbs stage `stage` of theta_star by `delta`, rolls the closed loop
/// from x0 under theta_star (the program's own deterministic dynamics), and
/// measures |pi_star(s_t') - pi_pert(s_t')| at every t' in [0, T-1] (both
/// policies evaluated on the theta_star trajectory). Displacements below
/// 1e-12 are dropped from the log-linear fit; fewer than 4 surviving points
/// reports all_zero.
EdsEstimate measure_sensitivity(const LookaheadProgram& prog, const ParamSchedule& theta_star,
                                int stage, const Eigen::VectorXd& delta, const Eigen::VectorXd& x0,
                                const SolveOptions& opts = {});

/// |zeta_{index_for(t+tau)} difference| between two schedules (tau-step-away
/// prediction error under the wrap-around map).
double prediction_error(const ParamSchedule& learned, const ParamSchedule& star, long t, long tau);

/// Closed-form bound comparison: generic-function-approximation bound
/// Z sqrt(d(T+1)) versus the decay-weighted bound Z sqrt(d) (1-l^{T+1})/(1-l),
/// plus the observed worst policy mismatch over a state sample.
struct BoundReport {
  double Z = 0.0;
  int d = 0;
  int T = 0;
  double lambda = 0.0;
  double gen_bound = 0.0;
  double iac_bound = 0.0;
  double observed_mismatch = 0.0;
  bool iac_tighter = false;
  double calibration_c = 1.0;
  bool within_calibrated_bound = true;
};

/// Pure bound arithmetic (no solves); exposed separately so the formulas can
/// be checked against independent evaluation.
double gen_bound(double Z, int d, int T);
double iac_bound(double Z, int d, int T, double lambda);

BoundReport lemma1_report(const LookaheadProgram& prog, const ParamSchedule& theta_star,
                          const ParamSchedule& theta_cand, double lambda_hat,
                          const std::vector<Eigen::VectorXd>& states, double calibration_c,
                          const SolveOptions& opts = {});

/// Componentwise check sum_{tau<=T-t} l^tau e(t,tau) <= (1-l)^2/(H^3 L_P)
/// - 2 C1 l^{T-t} for every t; `errors` is (T+1)x(T+1) with row t holding
/// e_{t,tau} in columns tau = 0..T-t.
std::vector<bool> prop1_condition_check(const Eigen::MatrixXd& errors, double H, double lambda,
                                        double C1, double L_P);

/// CSV serialization of one experiment curve: lines (gap, displacement).
std::string curve_csv(const EdsEstimate& e, const std::string& version);

}  // namespace iac::eds
