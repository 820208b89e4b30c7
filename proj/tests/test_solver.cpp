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

#include <iac/solver.hpp>
#include <iac/tracking.hpp>

#include "oracles.hpp"
#include "test_programs.hpp"

using namespace iac;
using namespace iac::test;

namespace {

ParamSchedule scalar_schedule(const LookaheadProgram& p, double z) {
  ParamSchedule th = schedule_for(p, -10.0, 10.0);
  th.set_all(Eigen::VectorXd::Constant(p.param_dim(), z));
  return th;
}

}  // namespace

TEST_CASE("1-stage linear objective pushes to the boundary") {
  // maximize -zeta*a over [0,1] with zeta = 2  =>  a* = 0, value 0
  ActionProgram prog(1, 1, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                     Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                     Eigen::VectorXd::Ones(1));
  const ParamSchedule th = scalar_schedule(prog, 2.0);
  const SolveResult r = solve_actor(prog, Eigen::VectorXd(), th, 0);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK_NEAR(r.first_action()[0], 0.0, 1e-7);
  CHECK_NEAR(r.optimal_value, 0.0, 1e-7);
  CHECK(r.kkt_residual <= 1e-6);
}

TEST_CASE("1-stage tracking optimum is interior") {
  // maximize -(a - 0.3)^2 over [0,1]  =>  a* = 0.3, value ~0
  ScalarTrackingToy prog;
  const ParamSchedule th = scalar_schedule(prog, 0.3);
  const SolveResult r = solve_actor(prog, Eigen::VectorXd(), th, 0);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK_NEAR(r.first_action()[0], 0.3, 1e-7);
  CHECK_NEAR(r.optimal_value, 0.0, 1e-6);
}

TEST_CASE("pinned 1-stage value evaluates directly") {
  // maximize -(a - 0.5)^2, pinned a = 0.2  =>  phi = -0.09
  ScalarTrackingToy prog;
  const ParamSchedule th = scalar_schedule(prog, 0.5);
  const double phi = optimal_value(prog, Eigen::VectorXd(), Eigen::VectorXd::Constant(1, 0.2), th);
  CHECK_NEAR(phi, -0.09, 1e-9);
}

TEST_CASE("pinning the argmax recovers the unpinned optimum") {
  Rng rng(7);
  RandomProgram prog(2, 2, 3, 2, rng);
  ParamSchedule th = schedule_for(prog);
  th.set_all((Eigen::VectorXd(2) << 0.4, -0.7).finished());
  const Eigen::VectorXd x0 = (Eigen::VectorXd(2) << 0.3, -0.2).finished();
  const SolveResult full = solve_actor(prog, x0, th, 0);
  REQUIRE(full.status == SolveStatus::Optimal);
  const double phi = optimal_value(prog, x0, full.first_action(), th);
  CHECK_NEAR(phi, full.optimal_value, 1e-8);
}

TEST_CASE("solver matches the grid oracle on random 2-stage programs") {
  Rng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int nx = 1 + static_cast<int>(rng.uniform() * 2);
    const int nu = 1 + static_cast<int>(rng.uniform() * 2);
    RandomProgram prog(nx, nu, 2, 2, rng);
    ParamSchedule th = schedule_for(prog);
    Eigen::VectorXd z(2);
    z << rng.uniform(-1, 1), rng.uniform(-1, 1);
    th.set_all(z);
    Eigen::VectorXd x0(nx);
    for (int i = 0; i < nx; ++i) x0[i] = rng.uniform(-0.5, 0.5);

    const StagedInstance inst = prog.actor_instance(x0, th, 0);
    const SolveResult r = solve(inst);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.kkt_residual <= 1e-6);

    const GridResult g =
        grid_search(inst, prog.action_lower(), prog.action_upper(), 1e-3);
    REQUIRE(g.found);
    CHECK((r.actions - g.actions).cwiseAbs().maxCoeff() <= 2e-3);
    CHECK(std::abs(r.optimal_value - g.reward) <= 1e-4);
  }
}

TEST_CASE("riccati and dense backends agree") {
  Rng rng(55);
  for (int trial = 0; trial < 6; ++trial) {
    RandomProgram prog(2, 2, 4, 3, rng);
    ParamSchedule th = schedule_for(prog);
    Eigen::VectorXd z(3);
    z << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    th.set_all(z);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.1);
    const StagedInstance inst = prog.actor_instance(x0, th, 0);
    SolveOptions od;
    od.use_riccati = false;
    const SolveResult a = solve(inst);
    const SolveResult b = solve(inst, od);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK((a.actions - b.actions).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK_NEAR(a.optimal_value, b.optimal_value, 1e-8);
    CHECK((a.eq_duals - b.eq_duals).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((a.ineq_duals - b.ineq_duals).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("uniqueness: distinct warm starts land on the same solution") {
  Rng rng(17);
  RandomProgram prog(2, 2, 3, 2, rng);
  ParamSchedule th = schedule_for(prog);
  th.set_all(Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  const StagedInstance inst = prog.actor_instance(x0, th, 0);
  const SolveResult a = solve(inst);
  Eigen::MatrixXd warm = Eigen::MatrixXd::Constant(2, inst.L(), 0.9);
  SolveOptions o2;
  o2.init_actions = &warm;
  const SolveResult b = solve(inst, o2);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK((a.actions - b.actions).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("KKT certificate fields are populated and consistent") {
  TrackingSpec spec;
  spec.T = 6;
  TrackingProgram prog(spec);
  ParamSchedule th = prog.make_schedule();
  th.set_all((Eigen::VectorXd(2) << 1.5, 0.0).finished());
  const SolveResult r = solve_actor(prog, Eigen::VectorXd::Constant(1, 0.2), th, 0);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.r_stationarity <= 1e-6);
  CHECK(r.r_primal_eq <= 1e-6);
  CHECK(r.r_primal_ineq <= 1e-6);
  CHECK(r.r_comp <= 1e-6);
  CHECK(r.ineq_duals.minCoeff() >= 0.0);
  CHECK(r.kkt_residual ==
        doctest::Approx(std::max({r.r_stationarity, r.r_primal_eq, r.r_primal_ineq, r.r_comp})));
}

TEST_CASE("receding horizon: instance length shrinks within a cycle") {
  TrackingSpec spec;
  spec.T = 5;
  TrackingProgram prog(spec);
  ParamSchedule th = prog.make_schedule();
  th.set_all(Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 0.4);
  for (long t : {0L, 3L, 4L, 5L, 11L}) {
    const StagedInstance inst = prog.actor_instance(x0, th, t);
    CHECK(inst.L() == 5 - static_cast<int>(t % 5));
    CHECK(inst.slot.front() == static_cast<int>(t % 5));
    CHECK(inst.terminal_slot == 5);
  }
}

TEST_CASE("pinned infeasible action reports Infeasible") {
  ScalarTrackingToy prog;
  const ParamSchedule th = scalar_schedule(prog, 0.5);
  CHECK_THROWS_AS((void)optimal_value(prog, Eigen::VectorXd(),
                                      Eigen::VectorXd::Constant(1, 1.5), th),
                  SolveError);
}

TEST_CASE("Berge continuity: displacement shrinks with the perturbation") {
  TrackingSpec spec;
  spec.T = 8;
  TrackingProgram prog(spec);
  ParamSchedule th = prog.make_schedule();
  th.set_all((Eigen::VectorXd(2) << 0.7, 0.1).finished());
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, -0.3);
  const Eigen::VectorXd base = solve_actor(prog, x0, th, 0).first_action();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps = 0.1; eps >= 1e-4; eps *= 0.5) {
    ParamSchedule tp = th;
    Eigen::VectorXd z = th.stage(3);
    z[0] += eps;
    tp.set_stage(3, z);
    const double disp = (solve_actor(prog, x0, tp, 0).first_action() - base).norm();
    CHECK(disp <= prev + 1e-9);
    prev = disp;
  }
  CHECK(prev <= 1e-4);
}
