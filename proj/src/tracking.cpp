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

#include "iac/tracking.hpp"

namespace iac {

StagedInstance TrackingProgram::actor_instance(const Eigen::VectorXd& obs,
                                               const ParamSchedule& theta, long t) const {
  const int m = s_.m;
  const int t0 = theta.index_for(t);
  const int L = s_.T - t0;
  StagedInstance inst;
  inst.x0 = obs;
  inst.stages.resize(L);
  inst.slot.resize(L);
  inst.terminal_slot = s_.T;

  const Eigen::VectorXd xlo = Eigen::VectorXd::Constant(m, s_.x_lo);
  const Eigen::VectorXd xhi = Eigen::VectorXd::Constant(m, s_.x_hi);
  const Eigen::VectorXd ulo = Eigen::VectorXd::Constant(m, s_.u_lo);
  const Eigen::VectorXd uhi = Eigen::VectorXd::Constant(m, s_.u_hi);

  for (int i = 0; i < L; ++i) {
    StageBlock& st = inst.stages[i];
    const int slot = t0 + i;
    inst.slot[i] = slot;
    const Eigen::VectorXd zr = theta.stage(slot);
    const Eigen::VectorXd xref = zr.head(m);
    const Eigen::VectorXd uref = zr.tail(m);

    st.H = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    st.H.topLeftCorner(m, m) = 2.0 * s_.wx * Eigen::MatrixXd::Identity(m, m);
    st.H.bottomRightCorner(m, m) = 2.0 * s_.wu * Eigen::MatrixXd::Identity(m, m);
    st.q.resize(2 * m);
    st.q.head(m) = -2.0 * s_.wx * xref;
    st.q.tail(m) = -2.0 * s_.wu * uref;
    inst.cost_offset += s_.wx * xref.squaredNorm() + s_.wu * uref.squaredNorm();

    st.A = s_.a_dyn * Eigen::MatrixXd::Identity(m, m);
    st.B = s_.b_dyn * Eigen::MatrixXd::Identity(m, m);
    st.c = Eigen::VectorXd::Zero(m);

    st.Cx.resize(0, m);
    st.Cu.resize(0, m);
    st.ub.resize(0);
    append_box_rows(st.Cx, st.Cu, st.ub, false, ulo, uhi, m, m);
    if (i > 0) append_box_rows(st.Cx, st.Cu, st.ub, true, xlo, xhi, m, m);
    add_uniqueness_reg(st);
  }

  const Eigen::VectorXd ztr = theta.stage(s_.T).head(m);
  inst.term.H = 2.0 * s_.wt * Eigen::MatrixXd::Identity(m, m);
  inst.term.q = -2.0 * s_.wt * ztr;
  inst.cost_offset += s_.wt * ztr.squaredNorm();
  inst.term.C.resize(0, m);
  inst.term.ub.resize(0);
  {
    Eigen::MatrixXd no_u(0, 0);
    append_box_rows(inst.term.C, no_u, inst.term.ub, true, xlo, xhi, m, 0);
  }
  add_uniqueness_reg(inst.term);
  return inst;
}

Eigen::VectorXd TrackingProgram::reward_param_grad(const ParamSchedule& theta, int slot,
                                                   const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& u,
                                                   bool terminal) const {
  const int m = s_.m;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * m);
  const Eigen::VectorXd zr = theta.stage(slot);
  if (terminal) {
    g.head(m) = 2.0 * s_.wt * (x - zr.head(m));
  } else {
    g.head(m) = 2.0 * s_.wx * (x - zr.head(m));
    g.tail(m) = 2.0 * s_.wu * (u - zr.tail(m));
  }
  return g;
}

Eigen::MatrixXd TrackingProgram::reward_param_cross(const ParamSchedule&, int,
                                                    const Eigen::VectorXd&,
                                                    const Eigen::VectorXd&,
                                                    bool terminal) const {
  const int m = s_.m;
  if (terminal) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, 2 * m);
    c.leftCols(m) = 2.0 * s_.wt * Eigen::MatrixXd::Identity(m, m);
    return c;
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  c.topLeftCorner(m, m) = 2.0 * s_.wx * Eigen::MatrixXd::Identity(m, m);
  c.bottomRightCorner(m, m) = 2.0 * s_.wu * Eigen::MatrixXd::Identity(m, m);
  return c;
}

}  // namespace iac
