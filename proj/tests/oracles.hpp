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

// Independent oracles for the test suites. None of these call the solver:
// the grid oracle enumerates the feasible box directly on the instance data,
// the finite-difference oracles re-evaluate optimal values, and the
// regression oracle solves 2x2 normal equations.

#pragma once

#include <cmath>
#include <iac/program.hpp>
#include <limits>
#include <vector>

// absolute-tolerance comparison used across the suites
#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))
#define REQUIRE_NEAR(a, b, tol) REQUIRE(std::abs((a) - (b)) <= (tol))

namespace iac::test {

struct GridResult {
  double reward = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd actions;  // nu x L
  bool found = false;
};

/// Evaluates a candidate action trajectory by rolling the dynamics; returns
/// the reward or -inf when a stage/terminal inequality is violated.
inline double rollout_reward(const StagedInstance& inst, const Eigen::MatrixXd& U,
                             double feas_tol = 1e-9) {
  const int L = inst.L(), nx = inst.nx(), nu = inst.nu();
  double cost = inst.cost_offset;
  Eigen::VectorXd x = inst.x0;
  Eigen::VectorXd xu(nx + nu);
  for (int i = 0; i < L; ++i) {
    const StageBlock& s = inst.stages[i];
    xu.head(nx) = x;
    xu.tail(nu) = U.col(i);
    if (s.ni() > 0) {
      const Eigen::VectorXd r = s.Cx * x + s.Cu * U.col(i) - s.ub;
      if (r.maxCoeff() > feas_tol) return -std::numeric_limits<double>::infinity();
    }
    cost += 0.5 * xu.dot(s.H * xu) + s.q.dot(xu);
    x = s.A * x + s.B * U.col(i) + s.c;
  }
  if (nx > 0) {
    if (inst.term.ni() > 0 && (inst.term.C * x - inst.term.ub).maxCoeff() > feas_tol)
      return -std::numeric_limits<double>::infinity();
    cost += 0.5 * x.dot(inst.term.H * x) + inst.term.q.dot(x);
  }
  return -cost;
}

/// Dense grid search over the action box with nested refinement: every level
/// scans `points` per dimension, then the window shrinks around the best
/// point until the grid step is <= final_step (equivalent to a dense
/// final_step grid for these strictly concave programs). Actions are bounded
/// by [alo, ahi] at every stage.
inline GridResult grid_search(const StagedInstance& inst, const Eigen::VectorXd& alo,
                              const Eigen::VectorXd& ahi, double final_step = 1e-3,
                              int points = 9) {
  const int L = inst.L(), nu = inst.nu();
  const int dims = L * nu;
  GridResult best;
  if (dims == 0) {
    best.found = true;
    best.reward = rollout_reward(inst, Eigen::MatrixXd(nu, 0));
    best.actions.resize(nu, 0);
    return best;
  }
  Eigen::VectorXd lo(dims), hi(dims);
  for (int i = 0; i < L; ++i) {
    lo.segment(i * nu, nu) = alo;
    hi.segment(i * nu, nu) = ahi;
  }
  Eigen::VectorXd cur = 0.5 * (lo + hi);
  Eigen::VectorXd wlo = lo, whi = hi;
  double step = (hi - lo).maxCoeff() / (points - 1);

  Eigen::MatrixXd U(nu, L);
  std::vector<int> idx(dims);
  Eigen::VectorXd bestpt = cur;
  while (true) {
    std::fill(idx.begin(), idx.end(), 0);
    bool improved_any = false;
    while (true) {
      for (int k = 0; k < dims; ++k) {
        const double span = whi[k] - wlo[k];
        const double v = span > 0 ? wlo[k] + span * idx[k] / (points - 1) : wlo[k];
        U(k % nu, k / nu) = v;
      }
      const double r = rollout_reward(inst, U);
      if (r > best.reward) {
        best.reward = r;
        best.actions = U;
        best.found = true;
        for (int k = 0; k < dims; ++k) bestpt[k] = U(k % nu, k / nu);
        improved_any = true;
      }
      int k = 0;
      for (; k < dims; ++k) {
        if (++idx[k] < points) break;
        idx[k] = 0;
      }
      if (k == dims) break;
    }
    (void)improved_any;
    // window shrink: +/- 2 cells around the best point
    double maxspan = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double cell = (whi[k] - wlo[k]) / (points - 1);
      wlo[k] = std::max(lo[k], bestpt[k] - 2.0 * cell);
      whi[k] = std::min(hi[k], bestpt[k] + 2.0 * cell);
      maxspan = std::max(maxspan, whi[k] - wlo[k]);
    }
    const double next_step = maxspan / (points - 1);
    if (step <= final_step) break;
    step = next_step;
  }
  return best;
}

/// Central finite difference of the pinned optimal value, independent of the
/// envelope path (re-solves through optimal_value only).
inline Eigen::VectorXd fd_value_gradient(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                                         const Eigen::VectorXd& a0, const ParamSchedule& theta,
                                         double h = 1e-5) {
  Eigen::VectorXd g(theta.flat_size());
  ParamSchedule th = theta;
  const Eigen::VectorXd flat = theta.flatten();
  for (int j = 0; j < flat.size(); ++j) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[j] += h;
    fm[j] -= h;
    th.set_from_flat(fp);
    const double vp = optimal_value(prog, obs, a0, th);
    th.set_from_flat(fm);
    const double vm = optimal_value(prog, obs, a0, th);
    g[j] = (vp - vm) / (2.0 * h);
  }
  return g;
}

/// Central finite difference of the actor solution function.
inline Eigen::MatrixXd fd_solution_jacobian(const LookaheadProgram& prog,
                                            const Eigen::VectorXd& obs,
                                            const ParamSchedule& theta, long t, double h = 1e-5) {
  Eigen::MatrixXd J(prog.action_dim(), theta.flat_size());
  ParamSchedule th = theta;
  const Eigen::VectorXd flat = theta.flatten();
  for (int j = 0; j < flat.size(); ++j) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[j] += h;
    fm[j] -= h;
    th.set_from_flat(fp);
    const Eigen::VectorXd ap = solve_actor(prog, obs, th, t).first_action();
    th.set_from_flat(fm);
    const Eigen::VectorXd am = solve_actor(prog, obs, th, t).first_action();
    J.col(j) = (ap - am) / (2.0 * h);
  }
  return J;
}

/// Relative error with a unit floor, applied entrywise over vectors/matrices.
inline double rel_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  const double scale = std::max(1e-6, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(1e-6, std::abs(want));
}

/// 2x2 normal-equations least squares of y against (phi, 1).
inline std::pair<double, double> normal_equations_fit(const std::vector<double>& phi,
                                                      const std::vector<double>& y) {
  const int n = static_cast<int>(phi.size());
  double sp = 0, spp = 0, sy = 0, spy = 0;
  for (int i = 0; i < n; ++i) {
    sp += phi[i];
    spp += phi[i] * phi[i];
    sy += y[i];
    spy += phi[i] * y[i];
  }
  const double det = n * spp - sp * sp;
  const double slope = (n * spy - sp * sy) / det;
  const double bias = (sy - slope * sp) / n;
  return {slope, bias};
}

}  // namespace iac::test
