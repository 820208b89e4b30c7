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

#include "iac/staged.hpp"

#include <stdexcept>

namespace iac {

namespace {

// Flat layout: v = [u_0, x_1, u_1, x_2, ..., u_{L-1}, x_L].
inline int u_off(const StagedInstance& in, int i) { return i * (in.nu() + in.nx()); }
inline int x_off(const StagedInstance& in, int i) {  // x_i, i >= 1
  return (i - 1) * (in.nu() + in.nx()) + in.nu();
}

inline Eigen::VectorXd stage_vec(const StagedInstance& in, const Eigen::VectorXd& v, int i) {
  // [x_i; u_i] with x_0 taken from in.x0
  Eigen::VectorXd xu(in.nx() + in.nu());
  if (i == 0)
    xu.head(in.nx()) = in.x0;
  else
    xu.head(in.nx()) = v.segment(x_off(in, i), in.nx());
  xu.tail(in.nu()) = v.segment(u_off(in, i), in.nu());
  return xu;
}

}  // namespace

double StagedInstance::cost_at(const Eigen::VectorXd& v) const {
  double cost = cost_offset;
  for (int i = 0; i < L(); ++i) {
    const Eigen::VectorXd xu = stage_vec(*this, v, i);
    cost += 0.5 * xu.dot(stages[i].H * xu) + stages[i].q.dot(xu);
  }
  if (nx() > 0) {
    const Eigen::VectorXd xL = L() > 0 ? Eigen::VectorXd(v.segment(x_off(*this, L()), nx())) : x0;
    cost += 0.5 * xL.dot(term.H * xL) + term.q.dot(xL);
  }
  return cost;
}

double StagedInstance::ineq_violation(const Eigen::VectorXd& v) const {
  double worst = 0.0;
  for (int i = 0; i < L(); ++i) {
    if (stages[i].ni() == 0) continue;
    const Eigen::VectorXd xu = stage_vec(*this, v, i);
    const Eigen::VectorXd r = stages[i].Cx * xu.head(nx()) + stages[i].Cu * xu.tail(nu()) -
                              stages[i].ub;
    worst = std::max(worst, r.maxCoeff());
  }
  if (term.ni() > 0 && nx() > 0) {
    const Eigen::VectorXd xL = L() > 0 ? Eigen::VectorXd(v.segment(x_off(*this, L()), nx())) : x0;
    worst = std::max(worst, (term.C * xL - term.ub).maxCoeff());
  }
  return std::max(0.0, worst);
}

double StagedInstance::eq_residual(const Eigen::VectorXd& v) const {
  double worst = 0.0;
  for (int i = 0; i < L(); ++i) {
    const Eigen::VectorXd xu = stage_vec(*this, v, i);
    const Eigen::VectorXd xn = v.segment(x_off(*this, i + 1), nx());
    const Eigen::VectorXd r = xn - stages[i].A * xu.head(nx()) - stages[i].B * xu.tail(nu()) -
                              stages[i].c;
    if (nx() > 0) worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::VectorXd StagedInstance::flat_from_actions(const Eigen::MatrixXd& actions) const {
  if (actions.cols() != L() || actions.rows() != nu())
    throw std::invalid_argument("flat_from_actions: wrong action trajectory shape");
  Eigen::VectorXd v(num_vars());
  Eigen::VectorXd x = x0;
  for (int i = 0; i < L(); ++i) {
    v.segment(u_off(*this, i), nu()) = actions.col(i);
    x = stages[i].A * x + stages[i].B * actions.col(i) + stages[i].c;
    v.segment(x_off(*this, i + 1), nx()) = x;
  }
  return v;
}

DenseForm DenseForm::build(const StagedInstance& in) {
  const int nx = in.nx(), nu = in.nu(), L = in.L();
  const int nv = in.num_vars();
  DenseForm d;
  d.Q = Eigen::MatrixXd::Zero(nv, nv);
  d.c = Eigen::VectorXd::Zero(nv);
  d.E = Eigen::MatrixXd::Zero(in.num_eq(), nv);
  d.e = Eigen::VectorXd::Zero(in.num_eq());
  d.G = Eigen::MatrixXd::Zero(in.num_ineq(), nv);
  d.g = Eigen::VectorXd::Zero(in.num_ineq());
  d.constant = in.cost_offset;

  int gi = 0;
  for (int i = 0; i < L; ++i) {
    const StageBlock& s = in.stages[i];
    const int uo = u_off(in, i);
    if (i == 0) {
      // x_0 is constant: fold its share of the stage cost / constraints.
      d.Q.block(uo, uo, nu, nu) += s.H.bottomRightCorner(nu, nu);
      d.c.segment(uo, nu) += s.q.tail(nu) + s.H.bottomLeftCorner(nu, nx) * in.x0;
      d.constant += 0.5 * in.x0.dot(s.H.topLeftCorner(nx, nx) * in.x0) + s.q.head(nx).dot(in.x0);
      if (s.ni() > 0) {
        d.G.block(gi, uo, s.ni(), nu) = s.Cu;
        d.g.segment(gi, s.ni()) = s.ub - s.Cx * in.x0;
        gi += s.ni();
      }
    } else {
      const int xo = x_off(in, i);
      d.Q.block(xo, xo, nx, nx) += s.H.topLeftCorner(nx, nx);
      d.Q.block(uo, uo, nu, nu) += s.H.bottomRightCorner(nu, nu);
      d.Q.block(xo, uo, nx, nu) += s.H.topRightCorner(nx, nu);
      d.Q.block(uo, xo, nu, nx) += s.H.bottomLeftCorner(nu, nx);
      d.c.segment(xo, nx) += s.q.head(nx);
      d.c.segment(uo, nu) += s.q.tail(nu);
      if (s.ni() > 0) {
        d.G.block(gi, xo, s.ni(), nx) = s.Cx;
        d.G.block(gi, uo, s.ni(), nu) = s.Cu;
        d.g.segment(gi, s.ni()) = s.ub;
        gi += s.ni();
      }
    }
    // dynamics row: x_{i+1} - A x_i - B u_i = c
    const int ro = i * nx;
    d.E.block(ro, x_off(in, i + 1), nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
    d.E.block(ro, uo, nx, nu) = -s.B;
    if (i == 0) {
      d.e.segment(ro, nx) = s.c + s.A * in.x0;
    } else {
      d.E.block(ro, x_off(in, i), nx, nx) = -s.A;
      d.e.segment(ro, nx) = s.c;
    }
  }
  if (nx > 0 && L > 0) {
    const int xo = x_off(in, L);
    d.Q.block(xo, xo, nx, nx) += in.term.H;
    d.c.segment(xo, nx) += in.term.q;
    if (in.term.ni() > 0) {
      d.G.block(gi, xo, in.term.ni(), nx) = in.term.C;
      d.g.segment(gi, in.term.ni()) = in.term.ub;
      gi += in.term.ni();
    }
  }
  return d;
}

StagedInstance pin_first_action(const StagedInstance& inst, const Eigen::VectorXd& a0,
                                PinFeasibility* feas, double tol) {
  if (inst.L() < 1) throw std::invalid_argument("pin_first_action: empty instance");
  if (a0.size() != inst.nu()) throw std::invalid_argument("pin_first_action: action size");
  const StageBlock& s0 = inst.stages.front();

  PinFeasibility f;
  if (s0.ni() > 0) {
    const Eigen::VectorXd r = s0.Cx * inst.x0 + s0.Cu * a0 - s0.ub;
    Eigen::Index row;
    const double worst = r.maxCoeff(&row);
    if (worst > tol) {
      f.feasible = false;
      f.violation = worst;
      f.row = static_cast<int>(row);
    }
  }
  if (feas) *feas = f;

  StagedInstance out;
  out.x0 = s0.A * inst.x0 + s0.B * a0 + s0.c;
  out.stages.assign(inst.stages.begin() + 1, inst.stages.end());
  out.term = inst.term;
  Eigen::VectorXd xu(inst.nx() + inst.nu());
  xu << inst.x0, a0;
  out.cost_offset = inst.cost_offset + 0.5 * xu.dot(s0.H * xu) + s0.q.dot(xu);
  out.slot.assign(inst.slot.begin() + (inst.slot.empty() ? 0 : 1), inst.slot.end());
  out.terminal_slot = inst.terminal_slot;
  out.pinned = true;
  out.pinned_x = inst.x0;
  out.pinned_u = a0;
  out.pinned_slot = inst.slot.empty() ? -1 : inst.slot.front();
  return out;
}

}  // namespace iac
