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

#include "iac/program.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <cmath>
#include <sstream>

namespace iac {

void add_uniqueness_reg(StageBlock& s) {
  s.H.diagonal().array() += 2.0 * kUniquenessReg;
}

void add_uniqueness_reg(TerminalBlock& t) {
  if (t.H.rows() > 0) t.H.diagonal().array() += 2.0 * kUniquenessReg;
}

void append_box_rows(Eigen::MatrixXd& Cx, Eigen::MatrixXd& Cu, Eigen::VectorXd& ub, bool on_state,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int nx, int nu) {
  const int n = static_cast<int>(lo.size());
  int extra = 0;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(hi[j])) ++extra;
    if (std::isfinite(lo[j])) ++extra;
  }
  const int base = static_cast<int>(ub.size());
  Cx.conservativeResize(base + extra, nx);
  Cu.conservativeResize(base + extra, nu);
  ub.conservativeResize(base + extra);
  Cx.bottomRows(extra).setZero();
  Cu.bottomRows(extra).setZero();
  int r = base;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(hi[j])) {
      (on_state ? Cx : Cu)(r, j) = 1.0;
      ub[r++] = hi[j];
    }
    if (std::isfinite(lo[j])) {
      (on_state ? Cx : Cu)(r, j) = -1.0;
      ub[r++] = -lo[j];
    }
  }
}

SolveResult solve_actor(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                        const ParamSchedule& theta, long t, const SolveOptions& opts) {
  return solve(prog.actor_instance(obs, theta, t), opts);
}

Eigen::VectorXd LookaheadProgram::next_obs(const Eigen::VectorXd& obs,
                                           const Eigen::VectorXd& action,
                                           const ParamSchedule& theta, long t) const {
  if (obs_dim() != state_dim())
    throw std::logic_error("next_obs must be overridden when obs_dim != state_dim");
  const StagedInstance inst = actor_instance(obs, theta, t);
  const StageBlock& s0 = inst.stages.front();
  return s0.A * obs + s0.B * action + s0.c;
}

double optimal_value(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                     const Eigen::VectorXd& a0, const ParamSchedule& theta,
                     const SolveOptions& opts, SolveResult* solved) {
  PinFeasibility feas;
  StagedInstance inst = prog.critic_instance(obs, a0, theta, &feas);
  if (!feas.feasible) {
    std::ostringstream os;
    os << "pinned action violates stage-0 constraint row " << feas.row << " by "
       << feas.violation;
    throw SolveError(SolveStatus::Infeasible, os.str());
  }
  SolveResult res = solve(inst, opts);
  if (res.status != SolveStatus::Optimal) {
    std::ostringstream os;
    os << "pinned solve failed: " << to_string(res.status) << " after " << res.iterations
       << " iterations, kkt residual " << res.kkt_residual;
    throw SolveError(res.status, os.str());
  }
  if (solved) *solved = std::move(res);
  return solved ? solved->optimal_value : res.optimal_value;
}

ValueGradient envelope_gradient(const LookaheadProgram& prog, const ParamSchedule& theta,
                                const StagedInstance& inst, const SolveResult& res) {
  const int d = prog.param_dim();
  ValueGradient out;
  out.grad = Eigen::VectorXd::Zero(theta.flat_size());
  if (inst.pinned && inst.pinned_slot >= 0)
    out.grad.segment(inst.pinned_slot * d, d) +=
        prog.reward_param_grad(theta, inst.pinned_slot, inst.pinned_x, inst.pinned_u, false);
  for (int i = 0; i < inst.L(); ++i)
    out.grad.segment(inst.slot[i] * d, d) += prog.reward_param_grad(
        theta, inst.slot[i], res.states.col(i), res.actions.col(i), false);
  if (inst.terminal_slot >= 0 && prog.state_dim() > 0)
    out.grad.segment(inst.terminal_slot * d, d) += prog.reward_param_grad(
        theta, inst.terminal_slot, res.states.col(inst.L()), Eigen::VectorXd(), true);
  out.strict_comp_margin = res.min_strict_comp;
  out.degenerate = res.min_strict_comp < kDegeneracyTol;
  return out;
}

ValueGradient value_gradient(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                             const Eigen::VectorXd& a0, const ParamSchedule& theta,
                             const SolveOptions& opts) {
  PinFeasibility feas;
  StagedInstance inst = prog.critic_instance(obs, a0, theta, &feas);
  if (!feas.feasible)
    throw SolveError(SolveStatus::Infeasible, "value_gradient: pinned action infeasible");
  SolveResult res = solve(inst, opts);
  if (res.status != SolveStatus::Optimal)
    throw SolveError(res.status, "value_gradient: solve failed");
  return envelope_gradient(prog, theta, inst, res);
}

Sensitivity solution_sensitivity(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                 const ParamSchedule& theta, long t, const SolveOptions& opts) {
  const StagedInstance inst = prog.actor_instance(obs, theta, t);
  const SolveResult res = solve(inst, opts);
  if (res.status != SolveStatus::Optimal)
    throw SolveError(res.status, "solution_sensitivity: solve failed");

  const int d = prog.param_dim();
  const int D = theta.flat_size();
  const int nx = inst.nx(), nu = inst.nu(), L = inst.L();
  const int nv = inst.num_vars(), ne = inst.num_eq();

  Sensitivity out;
  out.jac = Eigen::MatrixXd::Zero(nu, D);
  if (res.min_strict_comp < kDegeneracyTol) {
    out.degenerate = true;
    out.note = "strict complementarity margin " + std::to_string(res.min_strict_comp);
    return out;
  }

  const DenseForm den = DenseForm::build(inst);
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(res.active_set.size()); ++i)
    if (res.active_set[i]) act.push_back(i);
  const int ma = static_cast<int>(act.size());

  Eigen::MatrixXd GA(ma, nv);
  for (int k = 0; k < ma; ++k) GA.row(k) = den.G.row(act[k]);

  // LICQ: active-constraint Jacobian must have full row rank.
  if (ma + ne > 0) {
    Eigen::MatrixXd J(ma + ne, nv);
    if (ma > 0) J.topRows(ma) = GA;
    if (ne > 0) J.bottomRows(ne) = den.E;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J.transpose());
    if (qr.rank() < ma + ne) {
      out.degenerate = true;
      out.note = "active-set Jacobian rank " + std::to_string(qr.rank()) + " < " +
                 std::to_string(ma + ne);
      return out;
    }
  }

  // Cross derivative d(grad_v cost)/d theta = -d(grad_v reward)/d theta,
  // scattered from the stage hooks into flat rows / schedule columns.
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(nv, D);
  for (int i = 0; i < L; ++i) {
    const Eigen::MatrixXd ci = prog.reward_param_cross(theta, inst.slot[i], res.states.col(i),
                                                       res.actions.col(i), false);
    const int uo = i * (nu + nx);
    cross.block(uo, inst.slot[i] * d, nu, d) -= ci.bottomRows(nu);
    if (i > 0) cross.block((i - 1) * (nu + nx) + nu, inst.slot[i] * d, nx, d) -= ci.topRows(nx);
  }
  if (nx > 0 && L > 0 && inst.terminal_slot >= 0) {
    const Eigen::MatrixXd ct = prog.reward_param_cross(theta, inst.terminal_slot,
                                                       res.states.col(L), Eigen::VectorXd(), true);
    cross.block((L - 1) * (nu + nx) + nu, inst.terminal_slot * d, nx, d) -= ct;
  }

  const int n = nv + ne + ma;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M.topLeftCorner(nv, nv) = den.Q;
  if (ne > 0) {
    M.block(0, nv, nv, ne) = den.E.transpose();
    M.block(nv, 0, ne, nv) = den.E;
  }
  if (ma > 0) {
    M.block(0, nv + ne, nv, ma) = GA.transpose();
    M.block(nv + ne, 0, ma, nv) = GA;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) {
    out.degenerate = true;
    out.note = "singular KKT system";
    return out;
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, D);
  rhs.topRows(nv) = -cross;
  const Eigen::MatrixXd sol = lu.solve(rhs);
  out.jac = sol.topRows(nu);  // first action occupies the leading u_0 rows
  return out;
}

namespace {

Eigen::VectorXd fd_over(const std::function<double(const ParamSchedule&)>& value,
                        const ParamSchedule& theta, double step, const std::vector<int>& coords) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.flat_size());
  std::vector<int> idx = coords;
  if (idx.empty()) {
    idx.resize(theta.flat_size());
    for (int j = 0; j < theta.flat_size(); ++j) idx[j] = j;
  }
  Eigen::VectorXd flat = theta.flatten();
  ParamSchedule th = theta;
  for (int j : idx) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[j] += step;
    fm[j] -= step;
    th.set_from_flat(fp);
    const double vp = value(th);
    th.set_from_flat(fm);
    const double vm = value(th);
    g[j] = (vp - vm) / (2.0 * step);
  }
  return g;
}

}  // namespace

Eigen::VectorXd value_gradient_fd(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                  const Eigen::VectorXd& a0, const ParamSchedule& theta,
                                  double step, const std::vector<int>& coords) {
  return fd_over(
      [&](const ParamSchedule& th) { return optimal_value(prog, obs, a0, th); }, theta, step,
      coords);
}

Eigen::VectorXd actor_value_gradient_fd(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                        const ParamSchedule& theta, long t, double step,
                                        const std::vector<int>& coords) {
  return fd_over(
      [&](const ParamSchedule& th) {
        SolveResult r = solve_actor(prog, obs, th, t);
        if (r.status != SolveStatus::Optimal)
          throw SolveError(r.status, "actor_value_gradient_fd: solve failed");
        return r.optimal_value;
      },
      theta, step, coords);
}

}  // namespace iac
