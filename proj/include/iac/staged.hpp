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

#include <Eigen/Dense>
#include <vector>

namespace iac {

/// One stage of a finite-horizon concave-reward program, stored in
/// minimization form over v_t = [x_t; u_t]:
///   cost_t(x,u)  = 0.5 v' H v + q' v          (H symmetric PSD)
///   dynamics     x_{t+1} = A x + B u + c      (affine equality)
///   inequalities Cx x + Cu u <= ub            (boxes included as rows)
struct StageBlock {
  Eigen::MatrixXd H;   // (nx+nu) x (nx+nu)
  Eigen::VectorXd q;   // nx+nu
  Eigen::MatrixXd A;   // nx x nx
  Eigen::MatrixXd B;   // nx x nu
  Eigen::VectorXd c;   // nx
  Eigen::MatrixXd Cx;  // ni x nx
  Eigen::MatrixXd Cu;  // ni x nu
  Eigen::VectorXd ub;  // ni

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ni() const { return static_cast<int>(ub.size()); }
};

/// Terminal block over x_L: cost 0.5 x'Hx + q'x, C x <= ub.
struct TerminalBlock {
  Eigen::MatrixXd H;
  Eigen::VectorXd q;
  Eigen::MatrixXd C;
  Eigen::VectorXd ub;

  int ni() const { return static_cast<int>(ub.size()); }
};

/// A concrete numeric instance of a lookahead program: L stages plus a
/// terminal block, rooted at the fixed initial state x0. `cost_offset` is
/// a constant added to the minimization objective (it absorbs stage data
/// folded out by pinning). `slot[i]` records which schedule column
/// parametrized stage i, so optimal-value gradients can be scattered back
/// into θ; `terminal_slot` is the column of the terminal reward.
struct StagedInstance {
  Eigen::VectorXd x0;
  std::vector<StageBlock> stages;
  TerminalBlock term;
  double cost_offset = 0.0;

  std::vector<int> slot;
  int terminal_slot = -1;

  // Present when the first stage of the original program was pinned and
  // folded into constants; kept for envelope gradients.
  bool pinned = false;
  Eigen::VectorXd pinned_x, pinned_u;
  int pinned_slot = -1;

  int L() const { return static_cast<int>(stages.size()); }
  int nx() const { return static_cast<int>(x0.size()); }
  int nu() const { return stages.empty() ? 0 : stages.front().nu(); }
  int num_vars() const { return L() * (nx() + nu()); }
  int num_eq() const { return L() * nx(); }
  int num_ineq() const {
    int n = term.ni();
    for (const auto& s : stages) n += s.ni();
    return n;
  }

  /// Minimization objective at a flat point v = [u_0, x_1, u_1, ..., x_L]
  /// (includes cost_offset). Used by test oracles; independent of the solver.
  double cost_at(const Eigen::VectorXd& v) const;
  /// Reward convention (= -cost_at).
  double reward_at(const Eigen::VectorXd& v) const { return -cost_at(v); }

  /// Max inequality violation at v (0 when feasible); equality residual norm
  /// reported separately.
  double ineq_violation(const Eigen::VectorXd& v) const;
  double eq_residual(const Eigen::VectorXd& v) const;

  /// Rolls states forward from an action trajectory (nu x L) and returns the
  /// flat decision vector. Lets oracles search over actions only.
  Eigen::VectorXd flat_from_actions(const Eigen::MatrixXd& actions) const;
};

/// Dense materialization 0.5 v'Qv + c'v + const, Ev = e, Gv <= g of an
/// instance. Reference path: the dense solver backend, the KKT sensitivity
/// system and the brute-force oracles all work from this form.
struct DenseForm {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  double constant = 0.0;

  static DenseForm build(const StagedInstance& inst);
};

struct PinFeasibility {
  bool feasible = true;
  double violation = 0.0;  // worst stage-0 inequality violation
  int row = -1;
};

/// Folds the first stage of `inst` out by fixing u_0 = a0: the result is the
/// tail program rooted at x_1 = A x0 + B a0 + c with stage-0 cost moved into
/// cost_offset. Stage-0 inequalities become constants and are checked against
/// `tol`; the caller decides what to do on violation (the instance is still
/// returned so diagnostics can report it).
StagedInstance pin_first_action(const StagedInstance& inst, const Eigen::VectorXd& a0,
                                PinFeasibility* feas, double tol = 1e-7);

}  // namespace iac
