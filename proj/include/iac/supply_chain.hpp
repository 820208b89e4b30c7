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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iac/dataset.hpp"
#include "iac/program.hpp"
#include "iac/rng.hpp"

namespace iac::supply {

/// Inventory network: 2 suppliers feed warehouse nodes {0,1}; internal links
/// ship 0->2, 0->3, 1->2, 1->3; customer links sell from nodes 2 and 3.
/// Action layout a = [b(2); g(2); z(4)] with z ordered (0->2, 0->3, 1->2, 1->3).
struct NetworkConfig {
  int n_nodes = 4;
  Eigen::MatrixXd A_in;   // 4 x 8
  Eigen::MatrixXd A_out;  // 4 x 8
  Eigen::VectorXd h_max;  // 4
  Eigen::VectorXd b_max;  // 2
  Eigen::VectorXd g_max;  // 2
  Eigen::VectorXd z_max;  // 4
  Eigen::VectorXd Y;      // 2, sell prices
  Eigen::VectorXd kappa;  // 4, shipping costs
  Eigen::VectorXd alpha_hold;   // 4, linear holding cost
  Eigen::VectorXd lambda_hold;  // 4, quadratic holding cost
  Eigen::VectorXd h0;     // 4, episode initial inventory
  int horizon = 20;

  int n_actions() const { return 8; }
  Eigen::VectorXd action_lower() const { return Eigen::VectorXd::Zero(8); }
  Eigen::VectorXd action_upper() const {
    Eigen::VectorXd u(8);
    u << b_max, g_max, z_max;
    return u;
  }

  /// Default topology with the frozen cost draws used across the project.
  static NetworkConfig make_default();
  /// Checks incidence/sign invariants; throws std::invalid_argument.
  void validate() const;
};

/// Log-normal exogenous process: log(p, d) ~ N(mu, Sigma), 4-dimensional
/// (2 supplier prices then 2 customer demands).
struct ExogenousModel {
  Eigen::VectorXd mu;     // 4
  Eigen::MatrixXd Sigma;  // 4 x 4, symmetric PSD

  static ExogenousModel make_default();

  /// Means of the log-normal marginals, used as certainty-equivalent
  /// forecasts: exp(mu_i + Sigma_ii / 2).
  Eigen::VectorXd ce_forecast() const;
};

/// Draws (p, d); Cholesky with an eigenvalue-floor fallback for semidefinite
/// Sigma (fallback logged once via the returned flag).
struct ExoSample {
  Eigen::VectorXd p;  // 2
  Eigen::VectorXd d;  // 2
};
ExoSample sample_exogenous(const ExogenousModel& model, Rng& rng);

/// Surrogate holding-penalty parameters, one (P, q) shared across stages.
struct SurrogateParams {
  Eigen::MatrixXd P;  // 4 x 4
  Eigen::VectorXd q;  // 4

  static SurrogateParams zero() {
    return {Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Zero(4)};
  }
  Eigen::VectorXd pack() const;                        // R^20, row-major P then q
  static SurrogateParams unpack(const Eigen::VectorXd& z);
};

constexpr int kParamDim = 20;

struct EnvError : std::runtime_error {
  explicit EnvError(const std::string& w) : std::runtime_error(w) {}
};

/// One environment transition. `a` must satisfy constraints (boxes, outflow
/// A_out a <= h, g <= d) up to a small tolerance or EnvError is thrown with
/// the violated constraint named. The post-dynamics state is clamped into
/// [0, h_max].
struct StepResult {
  Eigen::VectorXd h_next;
  double reward;
};
StepResult step(const NetworkConfig& cfg, const Eigen::VectorXd& h, const Eigen::VectorXd& a,
                const Eigen::VectorXd& p, const Eigen::VectorXd& d, double tol = 1e-6);

/// The actor/critic lookahead program for this environment. Observations are
/// [h(4); p(2); d(2)]: stage 0 plans with the realized prices/demand, later
/// stages with certainty-equivalent forecasts.
class SupplyChainProgram : public LookaheadProgram {
 public:
  SupplyChainProgram(NetworkConfig cfg, ExogenousModel model);

  int obs_dim() const override { return 8; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 8; }
  int param_dim() const override { return kParamDim; }
  int horizon() const override { return cfg_.horizon; }

  StagedInstance actor_instance(const Eigen::VectorXd& obs, const ParamSchedule& theta,
                                long t) const override;

  Eigen::VectorXd reward_param_grad(const ParamSchedule& theta, int slot, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u, bool terminal) const override;
  Eigen::MatrixXd reward_param_cross(const ParamSchedule& theta, int slot, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u, bool terminal) const override;

  Eigen::VectorXd action_lower() const override { return cfg_.action_lower(); }
  Eigen::VectorXd action_upper() const override { return cfg_.action_upper(); }

  /// Surrogate flow dynamics with certainty-equivalent exogenous forecast.
  Eigen::VectorXd next_obs(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                           const ParamSchedule&, long) const override {
    Eigen::VectorXd out(8);
    out.head(4) = obs.head(4) + (cfg_.A_in - cfg_.A_out) * action;
    out.tail(4) = ce_;
    return out;
  }

  /// Schedule over the packed (P, q) parameter; tied across stages.
  ParamSchedule make_schedule(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    return ParamSchedule(kParamDim, cfg_.horizon, lo, hi, /*tied=*/true);
  }

  const NetworkConfig& config() const { return cfg_; }
  const ExogenousModel& model() const { return model_; }

 private:
  NetworkConfig cfg_;
  ExogenousModel model_;
  Eigen::VectorXd ce_;  // cached certainty-equivalent forecast (p, d)
};

/// Explicit-forecast surrogate builder: stage t plans with forecast[t]
/// = (p_hat, d_hat). Horizon equals forecast.size(). Rooted at inventory h.
StagedInstance build_surrogate(const NetworkConfig& cfg, const SurrogateParams& sp,
                               const std::vector<ExoSample>& forecast, const Eigen::VectorXd& h);

/// Policies that can act in the environment.
struct Policy {
  enum class Kind { Surrogate, Random } kind = Kind::Surrogate;
  SurrogateParams params;  // Surrogate
  std::uint64_t seed = 0;  // Random
  static Policy surrogate(const SurrogateParams& sp) { return {Kind::Surrogate, sp, 0}; }
  static Policy behavior() { return surrogate(SurrogateParams::zero()); }
  static Policy random(std::uint64_t seed) {
    return {Kind::Random, SurrogateParams::zero(), seed};
  }
};

/// Rolls the behavior policy for `days` steps (episodes of length `horizon`)
/// and records the offline dataset. Deterministic for a given seed.
Dataset collect_dataset(const NetworkConfig& cfg, const ExogenousModel& model,
                        const SurrogateParams& behavior, int days, std::uint64_t seed);

/// Pre-drawn exogenous sequence for one episode (length horizon).
std::vector<ExoSample> draw_episode_exogenous(const ExogenousModel& model, int horizon, Rng& rng);

/// Runs one closed-loop episode on a fixed exogenous sequence; returns the
/// cumulative true reward.
double simulate_episode(const NetworkConfig& cfg, const ExogenousModel& model,
                        const Policy& policy, const std::vector<ExoSample>& exo, int episode_index);

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> returns;
};

/// Monte-Carlo policy evaluation over fresh exogenous draws; per-episode RNG
/// streams are derived from the seed so results do not depend on scheduling.
EvalResult evaluate_policy(const NetworkConfig& cfg, const ExogenousModel& model,
                           const Policy& policy, int episodes, std::uint64_t seed);

/// Paired evaluation: both policies see identical exogenous draws.
std::pair<EvalResult, EvalResult> evaluate_paired(const NetworkConfig& cfg,
                                                  const ExogenousModel& model, const Policy& a,
                                                  const Policy& b, int episodes,
                                                  std::uint64_t seed);

}  // namespace iac::supply
