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

#include "iac/settings.hpp"

namespace iac {

namespace {
Eigen::MatrixXd mat_from_rowmajor(const Eigen::VectorXd& v, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  return m;
}
}  // namespace

supply::NetworkConfig network_from_config(const Config& c) {
  supply::NetworkConfig n = supply::NetworkConfig::make_default();
  if (c.has("network.a_in")) n.A_in = mat_from_rowmajor(c.get_vec("network.a_in", 32), 4, 8);
  if (c.has("network.a_out")) n.A_out = mat_from_rowmajor(c.get_vec("network.a_out", 32), 4, 8);
  n.h_max = c.get_vec("network.h_max", 4);
  n.b_max = c.get_vec("network.b_max", 2);
  n.g_max = c.get_vec("network.g_max", 2);
  n.z_max = c.get_vec("network.z_max", 4);
  n.Y = c.get_vec("network.sell_price", 2);
  n.kappa = c.get_vec("network.ship_cost", 4);
  n.alpha_hold = c.get_vec("network.alpha_hold", 4);
  n.lambda_hold = c.get_vec("network.lambda_hold", 4);
  n.h0 = c.get_vec("network.h0", 4);
  n.horizon = c.get_int("network.horizon", 20);
  n.validate();
  return n;
}

supply::ExogenousModel exogenous_from_config(const Config& c) {
  supply::ExogenousModel m = supply::ExogenousModel::make_default();
  m.mu = c.get_vec("exogenous.mu", 4);
  m.Sigma = Eigen::MatrixXd::Zero(4, 4);
  if (c.has("exogenous.sigma")) {
    m.Sigma = mat_from_rowmajor(c.get_vec("exogenous.sigma", 16), 4, 4);
  } else {
    m.Sigma.diagonal() = c.get_vec("exogenous.sigma_diag", 4);
  }
  return m;
}

TrackingSpec tracking_from_config(const Config& c) {
  TrackingSpec s;
  s.m = c.get_int("eds.m", 1);
  s.T = c.get_int("eds.horizon", 20);
  s.wx = c.get_double("eds.wx", 1.0);
  s.wu = c.get_double("eds.wu", 1.0);
  s.wt = c.get_double("eds.wt", 1.0);
  s.a_dyn = c.get_double("eds.a_dyn", 1.0);
  s.b_dyn = c.get_double("eds.b_dyn", 1.0);
  s.x_lo = c.get_double("eds.x_lo", -50.0);
  s.x_hi = c.get_double("eds.x_hi", 50.0);
  s.u_lo = c.get_double("eds.u_lo", -10.0);
  s.u_hi = c.get_double("eds.u_hi", 10.0);
  s.zeta_lo = c.get_double("eds.zeta_lo", -5.0);
  s.zeta_hi = c.get_double("eds.zeta_hi", 5.0);
  return s;
}

TrainConfig train_from_config(const Config& c) {
  TrainConfig t;
  t.beta = c.get_double("train.beta", 1.0);
  t.gamma = c.get_double("train.gamma", 0.99);
  t.actor_lr = c.get_double("train.actor_lr", 0.015);
  t.target_mix = c.get_double("train.target_mix", 0.25);
  t.td_lambda = c.get_double("train.td_lambda", 0.95);
  t.iterations = c.get_int("train.iterations", 200);
  t.inner_steps = c.get_int("train.inner_steps", 5);
  t.variant = variant_from_string(c.get_str("train.variant", "iac-rp"));
  t.w_decay = c.get_double("train.w_decay", 0.9);
  t.slope_cap = c.get_double("train.slope_cap", 1e3);
  t.bias_cap = c.get_double("train.bias_cap", 1e6);
  t.fd_fallback = c.get_bool("train.fd_fallback", true);
  t.solve = solver_from_config(c, /*training=*/true);
  t.validate();
  return t;
}

SolveOptions solver_from_config(const Config& c, bool training) {
  SolveOptions o;
  if (training) {
    o.tol = c.get_double("solver.train_tol", 3e-8);
    o.tol_comp = c.get_double("solver.train_tol_comp", 3e-9);
  } else {
    o.tol = c.get_double("solver.tol", 1e-10);
    o.tol_comp = c.get_double("solver.tol_comp", 1e-12);
  }
  return o;
}

ParamSchedule supply_schedule_from_config(const Config& c) {
  const double plo = c.get_double("actor.p_lo", -0.5);
  const double phi = c.get_double("actor.p_hi", 0.5);
  const double qlo = c.get_double("actor.q_lo", -1.0);
  const double qhi = c.get_double("actor.q_hi", 3.0);
  Eigen::VectorXd lo(supply::kParamDim), hi(supply::kParamDim);
  lo.head(16).setConstant(plo);
  hi.head(16).setConstant(phi);
  lo.tail(4).setConstant(qlo);
  hi.tail(4).setConstant(qhi);
  const int T = c.get_int("network.horizon", 20);
  return ParamSchedule(supply::kParamDim, T, lo, hi, /*tied=*/true);
}

}  // namespace iac
