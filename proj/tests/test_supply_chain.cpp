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

#include <iac/supply_chain.hpp>

#include "oracles.hpp"

using namespace iac;
using namespace iac::supply;
using iac::test::rel_error;

namespace {

// Duplicate of the true-cost formula, written independently of the env code
// (term by term, no Eigen reductions) for the reward-identity check.
double reference_reward(const NetworkConfig& cfg, const Eigen::VectorXd& h,
                        const Eigen::VectorXd& a, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& d) {
  (void)d;
  double buy = 0, sell = 0, ship = 0, hold = 0;
  for (int i = 0; i < 2; ++i) buy += p[i] * a[i];
  for (int i = 0; i < 2; ++i) sell += cfg.Y[i] * a[2 + i];
  for (int i = 0; i < 4; ++i) ship += cfg.kappa[i] * a[4 + i];
  for (int i = 0; i < 4; ++i) hold += cfg.alpha_hold[i] * h[i] + cfg.lambda_hold[i] * h[i] * h[i];
  return -buy + sell - ship - hold;
}

}  // namespace

TEST_CASE("default network satisfies the incidence invariants") {
  NetworkConfig cfg = NetworkConfig::make_default();
  cfg.validate();
  for (int j = 0; j < 8; ++j) {
    CHECK(cfg.A_in.col(j).sum() <= 1.0);
    CHECK(cfg.A_out.col(j).sum() <= 1.0);
    CHECK(cfg.A_in.col(j).sum() + cfg.A_out.col(j).sum() >= 1.0);
  }
}

TEST_CASE("empty network at rest stays at rest") {
  NetworkConfig cfg = NetworkConfig::make_default();
  const Eigen::VectorXd h = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  const auto r = step(cfg, h, a, Eigen::VectorXd::Constant(2, 2.0),
                      Eigen::VectorXd::Constant(2, 2.0));
  CHECK(r.h_next.isZero(0));
  CHECK(r.reward == 0.0);
}

TEST_CASE("single purchase arithmetic") {
  NetworkConfig cfg = NetworkConfig::make_default();
  cfg.alpha_hold = (Eigen::VectorXd(4) << 0.1, 0.1, 0.1, 0.1).finished();
  cfg.lambda_hold = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  a[0] = 1.0;  // buy 1 unit at node 0
  const auto r = step(cfg, h, a, Eigen::VectorXd::Constant(2, 2.0),
                      Eigen::VectorXd::Constant(2, 2.0));
  CHECK_NEAR(r.reward, -2.0, 1e-15);  // -p*b, holding cost of empty h is 0
  CHECK_NEAR(r.h_next[0], 1.0, 1e-15);
}

TEST_CASE("reward identity against an independent formula evaluation") {
  NetworkConfig cfg = NetworkConfig::make_default();
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd h(4), a(8), p(2), d(2);
    for (int i = 0; i < 4; ++i) h[i] = rng.uniform(0.0, cfg.h_max[i]);
    for (int i = 0; i < 2; ++i) p[i] = rng.uniform(1.0, 3.0);
    for (int i = 0; i < 2; ++i) d[i] = rng.uniform(0.5, 4.0);
    // feasible random action: boxes, then outflow/demand scaling
    for (int i = 0; i < 2; ++i) a[i] = rng.uniform(0.0, cfg.b_max[i]);
    for (int i = 0; i < 2; ++i) a[2 + i] = rng.uniform(0.0, std::min(cfg.g_max[i], d[i]));
    for (int i = 0; i < 4; ++i) a[4 + i] = rng.uniform(0.0, cfg.z_max[i]);
    for (int n = 0; n < 4; ++n) {
      const double out = (cfg.A_out * a)[n];
      if (out > h[n]) {
        const double f = h[n] / out * (1 - 1e-12);
        for (int j = 0; j < 8; ++j)
          if (cfg.A_out(n, j) > 0) a[j] *= f;
      }
    }
    const auto r = step(cfg, h, a, p, d);
    CHECK_NEAR(r.reward, reference_reward(cfg, h, a, p, d), 1e-12);
    CHECK((r.h_next.array() >= 0.0).all());
    CHECK((r.h_next.array() <= cfg.h_max.array() + 1e-12).all());
  }
}

TEST_CASE("constraint violations name the constraint") {
  NetworkConfig cfg = NetworkConfig::make_default();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  a[2] = 1.0;  // sell from empty node 2
  CHECK_THROWS_WITH_AS(
      (void)step(cfg, h, a, Eigen::VectorXd::Constant(2, 2.0), Eigen::VectorXd::Constant(2, 2.0)),
      doctest::Contains("constraint (e)"), EnvError);
  a.setZero();
  a[3] = 1.5;  // sell above demand
  h.setConstant(5.0);
  CHECK_THROWS_WITH_AS(
      (void)step(cfg, h, a, Eigen::VectorXd::Constant(2, 2.0), Eigen::VectorXd::Constant(2, 1.0)),
      doctest::Contains("constraint (f)"), EnvError);
}

TEST_CASE("degenerate exogenous model is deterministic and positive") {
  ExogenousModel m = ExogenousModel::make_default();
  m.Sigma.setZero();
  Rng rng(1);
  const ExoSample s = sample_exogenous(m, rng);
  CHECK_NEAR(s.p[0], std::exp(m.mu[0]), 1e-12);
  CHECK_NEAR(s.d[1], std::exp(m.mu[3]), 1e-12);
  CHECK(s.p.minCoeff() > 0);
  CHECK(s.d.minCoeff() > 0);
}

TEST_CASE("log-mean of exogenous draws concentrates around mu") {
  ExogenousModel m = ExogenousModel::make_default();
  Rng rng(42);
  const int N = 100000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < N; ++i) {
    const ExoSample s = sample_exogenous(m, rng);
    acc[0] += std::log(s.p[0]);
    acc[1] += std::log(s.p[1]);
    acc[2] += std::log(s.d[0]);
    acc[3] += std::log(s.d[1]);
  }
  acc /= N;
  for (int i = 0; i < 4; ++i) {
    const double se = std::sqrt(m.Sigma(i, i) / N);
    CHECK(std::abs(acc[i] - m.mu[i]) <= 3.0 * se);
  }
}

TEST_CASE("stronger inventory penalty drives planned stocks down") {
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();
  std::vector<ExoSample> fc(8);
  for (auto& f : fc) {
    f.p = model.ce_forecast().head(2);
    f.d = model.ce_forecast().tail(2);
  }
  const Eigen::VectorXd h0 = Eigen::VectorXd::Constant(4, 5.0);
  double prev_mean_h = std::numeric_limits<double>::infinity();
  double first = 0, last = 0;
  for (double qscale : {0.0, 1.0, 4.0, 16.0}) {
    SurrogateParams sp = SurrogateParams::zero();
    sp.q = Eigen::VectorXd::Constant(4, qscale);
    const StagedInstance inst = build_surrogate(cfg, sp, fc, h0);
    const SolveResult r = solve(inst);
    REQUIRE(r.status == SolveStatus::Optimal);
    const double mean_h = r.states.rightCols(r.states.cols() - 1).mean();
    if (qscale == 0.0) first = mean_h;
    last = mean_h;
    CHECK(mean_h <= prev_mean_h + 1e-6);  // plateaus once the plan stops trading
    prev_mean_h = mean_h;
  }
  CHECK(first - last > 0.1);
}

TEST_CASE("null economics yields zero optimal value") {
  NetworkConfig cfg = NetworkConfig::make_default();
  cfg.Y.setZero();
  cfg.kappa.setZero();
  std::vector<ExoSample> fc(3);
  for (auto& f : fc) {
    f.p = Eigen::VectorXd::Zero(2);
    f.d = Eigen::VectorXd::Constant(2, 2.0);
  }
  const StagedInstance inst =
      build_surrogate(cfg, SurrogateParams::zero(), fc, Eigen::VectorXd::Constant(4, 2.0));
  const SolveResult r = solve(inst);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK_NEAR(r.optimal_value, 0.0, 1e-5);
}

TEST_CASE("collect_dataset: row count, feasibility, replay, determinism") {
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();

  const Dataset one = collect_dataset(cfg, model, SurrogateParams::zero(), 1, 7);
  CHECK(one.size() == 1);

  const Dataset ds = collect_dataset(cfg, model, SurrogateParams::zero(), 45, 7);
  CHECK(ds.size() == 45);
  ds.validate();
  // replay: step(s, a, w) reproduces (h_next, r) bit-exactly
  for (int i = 0; i < ds.size(); ++i) {
    const Transition& tr = ds.transitions[i];
    const auto re = step(cfg, tr.s.head(4), tr.a, tr.s.segment(4, 2), tr.s.tail(2));
    CHECK(re.reward == tr.r);
    CHECK((re.h_next.array() == tr.s_next.head(4).array()).all());
  }
  const Dataset ds2 = collect_dataset(cfg, model, SurrogateParams::zero(), 45, 7);
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(ds2.transitions[i].r == ds.transitions[i].r);
    CHECK((ds2.transitions[i].a.array() == ds.transitions[i].a.array()).all());
  }
  // different seed changes the data
  const Dataset ds3 = collect_dataset(cfg, model, SurrogateParams::zero(), 45, 8);
  bool any_diff = false;
  for (int i = 0; i < ds.size() && !any_diff; ++i)
    any_diff = ds3.transitions[i].r != ds.transitions[i].r;
  CHECK(any_diff);
}

TEST_CASE("paired evaluation of the behavior policy against itself is exact") {
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();
  const auto [a, b] =
      evaluate_paired(cfg, model, Policy::behavior(), Policy::behavior(), 4, 123);
  for (size_t i = 0; i < a.returns.size(); ++i) CHECK(a.returns[i] == b.returns[i]);
  CHECK(a.mean == b.mean);
}

TEST_CASE("deterministic world gives zero std over one episode") {
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();
  model.Sigma.setZero();
  const EvalResult r = evaluate_policy(cfg, model, Policy::behavior(), 1, 5);
  CHECK(r.stddev == 0.0);
}

TEST_CASE("monte-carlo self-consistency across seeds") {
  NetworkConfig cfg = NetworkConfig::make_default();
  ExogenousModel model = ExogenousModel::make_default();
  const EvalResult a = evaluate_policy(cfg, model, Policy::behavior(), 24, 1001);
  const EvalResult b = evaluate_policy(cfg, model, Policy::behavior(), 24, 2002);
  const double se = std::sqrt(a.stddev * a.stddev / 24 + b.stddev * b.stddev / 24);
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * se + 1e-9);
}
