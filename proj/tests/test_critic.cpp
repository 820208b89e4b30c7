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

#include <iac/critic.hpp>
#include <iac/supply_chain.hpp>

#include "oracles.hpp"
#include "test_programs.hpp"

using namespace iac;
using namespace iac::test;

TEST_CASE("rwf_eval is plain affine arithmetic") {
  CHECK(rwf_eval(3.0, RwfParams{2.0, 1.0}) == 7.0);
  CHECK(rwf_eval(-1.25, RwfParams{1.0, 0.0}) == -1.25);
  CHECK_NEAR(rwf_eval(-0.09, RwfParams{0.5, 0.2}), 0.155, 1e-15);
}

TEST_CASE("identity warp reproduces the unpinned optimum at the argmax") {
  Rng rng(5);
  RandomProgram prog(2, 2, 3, 2, rng);
  ParamSchedule th = schedule_for(prog);
  th.set_all((Eigen::VectorXd(2) << 0.2, -0.1).finished());
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  const SolveResult full = solve_actor(prog, x0, th, 0);
  const CriticEval ce = critic_eval(prog, x0, full.first_action(), th, RwfParams{1.0, 0.0});
  CHECK_NEAR(ce.value, full.optimal_value, 1e-8);
  CHECK(ce.value == ce.phi);
}

TEST_CASE("critic is strictly monotone in phi for positive slope") {
  ScalarTrackingToy prog;
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 0.5));
  const RwfParams w{2.5, -1.0};
  const CriticEval c1 = critic_eval(prog, Eigen::VectorXd(), Eigen::VectorXd::Constant(1, 0.1),
                                    th, w);
  const CriticEval c2 = critic_eval(prog, Eigen::VectorXd(), Eigen::VectorXd::Constant(1, 0.4),
                                    th, w);
  REQUIRE(c1.phi < c2.phi);
  CHECK(c1.value < c2.value);
}

TEST_CASE("argmax invariance under strictly increasing affine warps") {
  // 1-stage: maximize -(a-0.3)^2 vs 2*(-(a-0.3)^2)+1
  ScalarTrackingToy toy;
  ParamSchedule th = schedule_for(toy, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 0.3));
  CHECK(argmax_invariance_check(toy, Eigen::VectorXd(), th, RwfParams{2.0, 1.0}));
  CHECK(argmax_invariance_check(toy, Eigen::VectorXd(), th, RwfParams{1.0, 1e6}));

  Rng rng(77);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 25; ++trial) {
    RandomProgram prog(2, 2, 2, 2, rng);
    ParamSchedule ths = schedule_for(prog);
    Eigen::VectorXd z(2);
    z << rng.uniform(-1, 1), rng.uniform(-1, 1);
    ths.set_all(z);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    RwfParams w{rng.uniform(0.2, 5.0), rng.uniform(-3.0, 3.0)};
    ++total;
    if (argmax_invariance_check(prog, x0, ths, w)) ++agree;

    // value relation: warped optimal value equals psi(unwarped value)
    const StagedInstance plain = prog.actor_instance(x0, ths, 0);
    const SolveResult a = solve(plain);
    const SolveResult b = solve(warp_instance(plain, w));
    CHECK_NEAR(b.optimal_value, rwf_eval(a.optimal_value, w), 1e-8 * std::max(1.0, w.slope));
  }
  CHECK(agree == total);
}

TEST_CASE("empirical action-Lipschitz constant is stable across sample sizes") {
  ScalarTrackingToy prog(0.0, 1.0);
  ParamSchedule th = schedule_for(prog, -10, 10);
  th.set_all(Eigen::VectorXd::Constant(1, 0.4));
  const RwfParams w{2.0, 0.3};
  auto lip = [&](int samples, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    Eigen::VectorXd a1(1), a2(1);
    for (int i = 0; i < samples; ++i) {
      a1[0] = rng.uniform();
      a2[0] = rng.uniform();
      if (std::abs(a1[0] - a2[0]) < 1e-6) continue;
      const double f1 = critic_eval(prog, Eigen::VectorXd(), a1, th, w).value;
      const double f2 = critic_eval(prog, Eigen::VectorXd(), a2, th, w).value;
      worst = std::max(worst, std::abs(f2 - f1) / (a2 - a1).norm());
    }
    return worst;
  };
  const double l_small = lip(100, 11);
  const double l_large = lip(2000, 12);
  REQUIRE(l_small > 0.0);
  CHECK(l_large <= 2.0 * l_small);
  CHECK(l_small <= 2.0 * l_large);
  // analytic bound for this instance: |psi'| * |phi'| <= 2 * 2*max|a-z| = 4*0.6
  CHECK(l_large <= 2.0 * 2.0 * 0.6 + 1e-6);
}

TEST_CASE("supply-chain critic at the empty network matches the grid oracle") {
  // tiny 2-node chain: supplier -> node0 -> node1 -> customer, horizon 2.
  // Built directly as a surrogate instance so the oracle stays cheap.
  using namespace iac::supply;
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();
  SupplyChainProgram prog(cfg, model);
  ParamSchedule th(kParamDim, cfg.horizon, Eigen::VectorXd::Constant(kParamDim, -10),
                   Eigen::VectorXd::Constant(kParamDim, 10), true);
  SurrogateParams sp = SurrogateParams::zero();
  sp.q = (Eigen::VectorXd(4) << 0.3, 0.1, 0.2, 0.4).finished();
  th.set_all(sp.pack());

  Eigen::VectorXd obs(8);
  obs << 0, 0, 0, 0, 2.0, 2.0, 2.0, 2.0;  // empty network
  const Eigen::VectorXd a0 = Eigen::VectorXd::Zero(8);
  const double phi = optimal_value(prog, obs, a0, th);

  // grid oracle over the reduced pinned program via a short-horizon replica:
  // with h = 0 and a0 = 0 pinned, stage 1 onward still starts empty, so the
  // optimal continuation value of the tiny replica below must match the
  // 2-stage truncation. Here we verify against a direct 2-stage build.
  std::vector<ExoSample> fc(2);
  fc[0].p = obs.segment(4, 2);
  fc[0].d = obs.tail(2);
  fc[1].p = model.ce_forecast().head(2);
  fc[1].d = model.ce_forecast().tail(2);
  StagedInstance tiny = build_surrogate(cfg, sp, fc, Eigen::VectorXd::Zero(4));
  PinFeasibility feas;
  StagedInstance pinned = pin_first_action(tiny, a0, &feas);
  REQUIRE(feas.feasible);
  const SolveResult solved = solve(pinned);
  REQUIRE(solved.status == SolveStatus::Optimal);
  const GridResult g = grid_search(pinned, cfg.action_lower(), cfg.action_upper(), 2e-3, 7);
  REQUIRE(g.found);
  CHECK_NEAR(solved.optimal_value, g.reward, 1e-3);

  // the full-horizon phi exists and the warped critic is exactly affine in it
  const RwfParams w{1.5, 0.25};
  const CriticEval ce = critic_eval(prog, obs, a0, th, w);
  CHECK(ce.value == w.slope * ce.phi + w.bias);
  CHECK(ce.phi == phi);
}
