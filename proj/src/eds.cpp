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

#include "iac/eds.hpp"

#include <cmath>
#include <sstream>

#include "iac/io.hpp"
#include "iac/parallel.hpp"

namespace iac::eds {

namespace {

ParamSchedule untied_copy(const ParamSchedule& th) {
  ParamSchedule out(th.dim(), th.horizon(), th.lower(), th.upper(), /*tied=*/false);
  for (int t = 0; t <= th.horizon(); ++t) out.set_stage(t, th.stage(t));
  return out;
}

Eigen::VectorXd policy_action(const LookaheadProgram& prog, const Eigen::VectorXd& obs,
                              const ParamSchedule& th, long t, const SolveOptions& opts) {
  SolveResult r = solve_actor(prog, obs, th, t, opts);
  if (r.status != SolveStatus::Optimal)
    throw SolveError(r.status, "eds: actor solve failed at t=" + std::to_string(t));
  return r.first_action();
}

}  // namespace

EdsEstimate measure_sensitivity(const LookaheadProgram& prog, const ParamSchedule& theta_star,
                                int stage, const Eigen::VectorXd& delta, const Eigen::VectorXd& x0,
                                const SolveOptions& opts) {
  const int T = theta_star.horizon();
  if (stage < 0 || stage > T) throw std::invalid_argument("measure_sensitivity: bad stage");
  if (delta.size() != theta_star.dim())
    throw std::invalid_argument("measure_sensitivity: delta dimension");

  const ParamSchedule star = untied_copy(theta_star);
  ParamSchedule pert = star;
  pert.set_stage(stage, star.stage(stage) + delta);

  EdsEstimate out;
  out.stage = stage;
  out.delta_norm = delta.norm();

  // theta_star closed-loop trajectory, then both policies at its states
  std::vector<Eigen::VectorXd> obs_traj(T);
  Eigen::VectorXd obs = x0;
  for (int t = 0; t < T; ++t) {
    obs_traj[t] = obs;
    const Eigen::VectorXd a = policy_action(prog, obs, star, t, opts);
    if (t + 1 < T) obs = prog.next_obs(obs, a, star, t);
  }
  std::vector<double> disp(T);
  parallel_for(T, [&](int t) {
    const Eigen::VectorXd a_star = policy_action(prog, obs_traj[t], star, t, opts);
    const Eigen::VectorXd a_pert = policy_action(prog, obs_traj[t], pert, t, opts);
    disp[t] = (a_star - a_pert).norm();
  });

  std::vector<double> xs, ys;
  for (int t = 0; t < T; ++t) {
    const int gap = std::abs(stage - t);
    out.curve.emplace_back(gap, disp[t]);
    if (disp[t] > 1e-12) {
      xs.push_back(gap);
      ys.push_back(std::log(disp[t]));
    }
  }
  if (static_cast<int>(xs.size()) < 4) {
    out.all_zero = true;
    return out;
  }
  // least-squares line ln(disp) = a + b*gap
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (int i = 0; i < n; ++i) {
    const double fit = a + b * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  out.lambda_hat = std::exp(b);
  out.H_hat = std::exp(a) / std::max(out.delta_norm, 1e-300);
  if (out.H_hat < 1.0) {
    out.H_hat = 1.0;
    out.h_clamped = true;
  }
  out.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

double prediction_error(const ParamSchedule& learned, const ParamSchedule& star, long t,
                        long tau) {
  if (learned.dim() != star.dim() || learned.horizon() != star.horizon())
    throw std::invalid_argument("prediction_error: schedule shape mismatch");
  const int idx = learned.index_for(t + tau);
  return (learned.stage(idx) - star.stage(idx)).norm();
}

double gen_bound(double Z, int d, int T) { return Z * std::sqrt(double(d) * (T + 1)); }

double iac_bound(double Z, int d, int T, double lambda) {
  const double geom = std::abs(1.0 - lambda) < 1e-12
                          ? double(T + 1)
                          : (1.0 - std::pow(lambda, T + 1)) / (1.0 - lambda);
  return Z * std::sqrt(double(d)) * geom;
}

BoundReport lemma1_report(const LookaheadProgram& prog, const ParamSchedule& theta_star,
                          const ParamSchedule& theta_cand, double lambda_hat,
                          const std::vector<Eigen::VectorXd>& states, double calibration_c,
                          const SolveOptions& opts) {
  BoundReport rep;
  rep.d = theta_star.dim();
  rep.T = theta_star.horizon();
  rep.lambda = lambda_hat;
  rep.calibration_c = calibration_c;
  const Eigen::VectorXd diff = (theta_star.flatten() - theta_cand.flatten()).cwiseAbs();
  rep.Z = diff.size() ? diff.maxCoeff() : 0.0;
  rep.gen_bound = gen_bound(rep.Z, rep.d, rep.T);
  rep.iac_bound = iac_bound(rep.Z, rep.d, rep.T, lambda_hat);
  rep.iac_tighter = rep.iac_bound < rep.gen_bound;

  std::vector<double> mismatch(states.size(), 0.0);
  parallel_for(static_cast<int>(states.size()), [&](int i) {
    const Eigen::VectorXd a = policy_action(prog, states[i], theta_star, 0, opts);
    const Eigen::VectorXd b = policy_action(prog, states[i], theta_cand, 0, opts);
    mismatch[i] = (a - b).norm();
  });
  for (double m : mismatch) rep.observed_mismatch = std::max(rep.observed_mismatch, m);
  rep.within_calibrated_bound = rep.observed_mismatch <= calibration_c * rep.iac_bound + 1e-12;
  return rep;
}

std::vector<bool> prop1_condition_check(const Eigen::MatrixXd& errors, double H, double lambda,
                                        double C1, double L_P) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("prop1_condition_check: lambda must be in (0,1)");
  if (!(H >= 1.0)) throw std::invalid_argument("prop1_condition_check: H must be >= 1");
  const int T = static_cast<int>(errors.rows()) - 1;
  std::vector<bool> ok(T + 1);
  for (int t = 0; t <= T; ++t) {
    double lhs = 0.0, lp = 1.0;
    for (int tau = 0; tau <= T - t; ++tau, lp *= lambda) lhs += lp * errors(t, tau);
    const double rhs =
        (1.0 - lambda) * (1.0 - lambda) / (H * H * H * L_P) - 2.0 * C1 * std::pow(lambda, T - t);
    ok[t] = lhs <= rhs;
  }
  return ok;
}

std::string curve_csv(const EdsEstimate& e, const std::string& version) {
  std::ostringstream out;
  out << "# " << version << "\n";
  out << "gap,displacement\n";
  for (const auto& [gap, disp] : e.curve) out << gap << "," << format_double(disp) << "\n";
  return out.str();
}

}  // namespace iac::eds
