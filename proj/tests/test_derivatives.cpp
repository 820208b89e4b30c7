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

#include <doctest.h>

#include <iac/tracking.hpp>

#include "oracles.hpp"
#include "test_programs.hpp"

using namespace iac;
using namespace iac::test;

TEST_CASE("envelope gradient of the boundary solution is the action itself") {
  // maximize -zeta*a on [0,1], zeta = 2: a* = 0 and d(phi)/d(zeta) = -a* = 0
  ActionProgram prog(1, 1, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                     Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                     Eigen::VectorXd::Ones(1));
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 2.0));
  const StagedInstance inst = prog.actor_instance(Eigen::VectorXd(), th, 0);
  const SolveResult res = solve(inst);
  REQUIRE(res.status == SolveStatus::Optimal);
  const ValueGradient g = envelope_gradient(prog, th, inst, res);
  CHECK_NEAR(g.grad[0], 0.0, 1e-7);  // slot 0
}

TEST_CASE("perfect-tracking envelope is flat") {
  // maximize -(a - zeta)^2, zeta = 0.3 interior: value is ~0 in a
  // neighborhood, so d(phi)/d(zeta) ~ 0
  ScalarTrackingToy prog;
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 0.3));
  const StagedInstance inst = prog.actor_instance(Eigen::VectorXd(), th, 0);
  const SolveResult res = solve(inst);
  REQUIRE(res.status == SolveStatus::Optimal);
  const ValueGradient g = envelope_gradient(prog, th, inst, res);
  CHECK_NEAR(g.grad[0], 0.0, 1e-5);
}

TEST_CASE("pinned value gradient matches central finite differences") {
  Rng rng(2024);
  int tested = 0;
  while (tested < 8) {
    RandomProgram prog(2, 2, 3, 2, rng);
    ParamSchedule th = schedule_for(prog);
    Eigen::VectorXd z(2);
    z << rng.uniform(-1, 1), rng.uniform(-1, 1);
    th.set_all(z);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd a0(2);
    a0 << rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8);

    const ValueGradient g = value_gradient(prog, x0, a0, th);
    if (g.degenerate) continue;  // nondegenerate instances only
    const Eigen::VectorXd fd = fd_value_gradient(prog, x0, a0, th);
    CHECK(rel_error(g.grad, fd) <= 1e-4);
    ++tested;
  }
}

TEST_CASE("solution sensitivity: interior tracking gives da*/dzeta = 1") {
  ScalarTrackingToy prog;
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 0.3));
  const Sensitivity s = solution_sensitivity(prog, Eigen::VectorXd(), th, 0);
  REQUIRE_FALSE(s.degenerate);
  CHECK_NEAR(s.jac(0, 0), 1.0, 1e-6);
}

TEST_CASE("solution sensitivity: clamped tracking is frozen at the bound") {
  ScalarTrackingToy prog;
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 2.0));  // target beyond the box
  const Sensitivity s = solution_sensitivity(prog, Eigen::VectorXd(), th, 0);
  REQUIRE_FALSE(s.degenerate);
  CHECK_NEAR(s.jac(0, 0), 0.0, 1e-6);
}

TEST_CASE("solution sensitivity matches finite differences on random programs") {
  Rng rng(31337);
  int tested = 0;
  while (tested < 6) {
    RandomProgram prog(2, 1, 3, 2, rng);
    ParamSchedule th = schedule_for(prog);
    Eigen::VectorXd z(2);
    z << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
    th.set_all(z);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    const Sensitivity s = solution_sensitivity(prog, x0, th, 0);
    if (s.degenerate) continue;
    const SolveResult base = solve_actor(prog, x0, th, 0);
    if (base.min_strict_comp < 1e-4) continue;  // keep FD away from active-set changes
    const Eigen::MatrixXd fd = fd_solution_jacobian(prog, x0, th, 0);
    CHECK(rel_error(s.jac, fd) <= 1e-4);
    ++tested;
  }
}

TEST_CASE("tracking program cross-derivatives are consistent with FD") {
  TrackingSpec spec;
  spec.T = 6;
  spec.wx = 1.3;
  spec.wu = 0.4;
  TrackingProgram prog(spec);
  ParamSchedule th = prog.make_schedule();
  for (int t = 0; t <= spec.T; ++t)
    th.set_stage(t, (Eigen::VectorXd(2) << std::sin(0.7 * t), 0.1 * t - 0.3).finished());
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 0.25);

  const Sensitivity s = solution_sensitivity(prog, x0, th, 0);
  REQUIRE_FALSE(s.degenerate);
  const Eigen::MatrixXd fd = fd_solution_jacobian(prog, x0, th, 0);
  CHECK(rel_error(s.jac, fd) <= 1e-4);

  const SolveResult base = solve_actor(prog, x0, th, 0);
  const StagedInstance inst = prog.actor_instance(x0, th, 0);
  const ValueGradient g = envelope_gradient(prog, th, inst, base);
  ParamSchedule th2 = th;
  Eigen::VectorXd fdg(th.flat_size());
  const Eigen::VectorXd flat = th.flatten();
  for (int j = 0; j < flat.size(); ++j) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[j] += 1e-5;
    fm[j] -= 1e-5;
    th2.set_from_flat(fp);
    const double vp = solve_actor(prog, x0, th2, 0).optimal_value;
    th2.set_from_flat(fm);
    const double vm = solve_actor(prog, x0, th2, 0).optimal_value;
    fdg[j] = (vp - vm) / 2e-5;
  }
  CHECK(rel_error(g.grad, fdg) <= 1e-4);
}

TEST_CASE("degenerate flag falls back to finite differences cleanly") {
  // pinning exactly at the demand-free boundary makes a weakly active row
  ScalarTrackingToy prog;
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 1.0));  // optimum exactly at hi=1
  const ValueGradient g = value_gradient(prog, Eigen::VectorXd(),
                                         Eigen::VectorXd::Constant(1, 0.4), th);
  // pinned program has no active rows left; gradient must match FD either way
  const Eigen::VectorXd fd =
      fd_value_gradient(prog, Eigen::VectorXd(), Eigen::VectorXd::Constant(1, 0.4), th);
  CHECK(rel_error(g.grad, fd) <= 1e-4);
}
