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

#include "iac/supply_chain.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "iac/parallel.hpp"

namespace iac::supply {

namespace {
constexpr int kNb = 2, kNg = 2, kNz = 4, kNa = 8, kNh = 4;
}

NetworkConfig NetworkConfig::make_default() {
  NetworkConfig c;
  c.A_in = Eigen::MatrixXd::Zero(kNh, kNa);
  c.A_out = Eigen::MatrixXd::Zero(kNh, kNa);
  // supply links into the warehouses
  c.A_in(0, 0) = 1.0;
  c.A_in(1, 1) = 1.0;
  // internal links 0->2, 0->3, 1->2, 1->3 (action columns 4..7)
  c.A_out(0, 4) = 1.0;
  c.A_in(2, 4) = 1.0;
  c.A_out(0, 5) = 1.0;
  c.A_in(3, 5) = 1.0;
  c.A_out(1, 6) = 1.0;
  c.A_in(2, 6) = 1.0;
  c.A_out(1, 7) = 1.0;
  c.A_in(3, 7) = 1.0;
  // customer links sell from nodes 2 and 3 (action columns 2..3)
  c.A_out(2, 2) = 1.0;
  c.A_out(3, 3) = 1.0;

  c.h_max = Eigen::VectorXd::Constant(kNh, 10.0);
  c.b_max = Eigen::VectorXd::Constant(kNb, 5.0);
  c.g_max = Eigen::VectorXd::Constant(kNg, 5.0);
  c.z_max = Eigen::VectorXd::Constant(kNz, 5.0);
  c.Y = Eigen::VectorXd::Constant(kNg, 4.0);
  c.kappa = Eigen::VectorXd::Constant(kNz, 0.2);
  // frozen U[0.05, 0.3] draws
  c.alpha_hold = (Eigen::VectorXd(kNh) << 0.12, 0.27, 0.21, 0.08).finished();
  c.lambda_hold = (Eigen::VectorXd(kNh) << 0.19, 0.11, 0.26, 0.15).finished();
  c.h0 = Eigen::VectorXd::Constant(kNh, 2.0);
  c.horizon = 20;
  return c;
}

void NetworkConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("NetworkConfig: " + m); };
  if (A_in.rows() != kNh || A_in.cols() != kNa || A_out.rows() != kNh || A_out.cols() != kNa)
    fail("incidence matrices must be 4x8");
  for (int j = 0; j < kNa; ++j) {
    const double in = A_in.col(j).sum();
    const double out = A_out.col(j).sum();
    if (in > 1.0 + 1e-12 || out > 1.0 + 1e-12) fail("link enters/leaves more than one node");
    if (in + out < 1.0 - 1e-12) fail("dangling link column " + std::to_string(j));
    for (int i = 0; i < kNh; ++i)
      if ((A_in(i, j) != 0.0 && A_in(i, j) != 1.0) || (A_out(i, j) != 0.0 && A_out(i, j) != 1.0))
        fail("incidence entries must be 0/1");
  }
  if ((h_max.array() <= 0).any() || (b_max.array() <= 0).any() || (g_max.array() <= 0).any() ||
      (z_max.array() <= 0).any())
    fail("bounds must be strictly positive");
  if ((alpha_hold.array() < 0).any() || (lambda_hold.array() < 0).any())
    fail("holding costs must be non-negative");
  if ((h0.array() < 0).any() || (h0.array() > h_max.array()).any())
    fail("initial inventory outside [0, h_max]");
  if (horizon < 1) fail("horizon must be >= 1");
}

ExogenousModel ExogenousModel::make_default() {
  ExogenousModel m;
  m.mu.resize(4);
  // mean price ~2 with 30% log-std, mean demand ~2 with 20% log-std
  m.mu << 0.64814718055994529, 0.64814718055994529, 0.67314718055994529, 0.67314718055994529;
  m.Sigma = Eigen::MatrixXd::Zero(4, 4);
  m.Sigma.diagonal() << 0.09, 0.09, 0.04, 0.04;
  return m;
}

Eigen::VectorXd ExogenousModel::ce_forecast() const {
  return (mu.array() + 0.5 * Sigma.diagonal().array()).exp();
}

ExoSample sample_exogenous(const ExogenousModel& model, Rng& rng) {
  const int n = static_cast<int>(model.mu.size());
  Eigen::VectorXd zs(n);
  for (int i = 0; i < n; ++i) zs[i] = rng.normal();
  Eigen::LLT<Eigen::MatrixXd> llt(model.Sigma);
  Eigen::VectorXd corr;
  if (llt.info() == Eigen::Success) {
    corr = llt.matrixL() * zs;
  } else {
    // PSD repair: floor negative eigenvalues at zero
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.Sigma);
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    corr = es.eigenvectors() * lam.asDiagonal() * zs;
  }
  const Eigen::VectorXd w = (model.mu + corr).array().exp();
  ExoSample out;
  out.p = w.head(2);
  out.d = w.tail(2);
  return out;
}

Eigen::VectorXd SurrogateParams::pack() const {
  Eigen::VectorXd z(kParamDim);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) z[i * 4 + j] = P(i, j);
  z.tail(4) = q;
  return z;
}

SurrogateParams SurrogateParams::unpack(const Eigen::VectorXd& z) {
  if (z.size() != kParamDim) throw std::invalid_argument("SurrogateParams: bad size");
  SurrogateParams sp;
  sp.P.resize(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) sp.P(i, j) = z[i * 4 + j];
  sp.q = z.tail(4);
  return sp;
}

StepResult step(const NetworkConfig& cfg, const Eigen::VectorXd& h, const Eigen::VectorXd& a,
                const Eigen::VectorXd& p, const Eigen::VectorXd& d, double tol) {
  auto check = [&](bool ok, char label, int idx, double by) {
    if (!ok) {
      std::ostringstream os;
      os << "constraint (" << label << ") violated at index " << idx << " by " << by;
      throw EnvError(os.str());
    }
  };
  const auto b = a.head(kNb);
  const auto g = a.segment(kNb, kNg);
  const auto z = a.tail(kNz);
  for (int i = 0; i < kNh; ++i) {
    check(h[i] >= -tol, 'a', i, -h[i]);
    check(h[i] <= cfg.h_max[i] + tol, 'a', i, h[i] - cfg.h_max[i]);
  }
  for (int i = 0; i < kNb; ++i) {
    check(b[i] >= -tol, 'b', i, -b[i]);
    check(b[i] <= cfg.b_max[i] + tol, 'b', i, b[i] - cfg.b_max[i]);
  }
  for (int i = 0; i < kNg; ++i) {
    check(g[i] >= -tol, 'c', i, -g[i]);
    check(g[i] <= cfg.g_max[i] + tol, 'c', i, g[i] - cfg.g_max[i]);
  }
  for (int i = 0; i < kNz; ++i) {
    check(z[i] >= -tol, 'd', i, -z[i]);
    check(z[i] <= cfg.z_max[i] + tol, 'd', i, z[i] - cfg.z_max[i]);
  }
  const Eigen::VectorXd outflow = cfg.A_out * a;
  for (int i = 0; i < kNh; ++i) check(outflow[i] <= h[i] + tol, 'e', i, outflow[i] - h[i]);
  for (int i = 0; i < kNg; ++i) check(g[i] <= d[i] + tol, 'f', i, g[i] - d[i]);

  StepResult out;
  out.h_next = (h + (cfg.A_in - cfg.A_out) * a).cwiseMax(0.0).cwiseMin(cfg.h_max);
  out.reward = -p.dot(b) + cfg.Y.dot(g) - cfg.kappa.dot(z) - cfg.alpha_hold.dot(h) -
               cfg.lambda_hold.dot(h.cwiseProduct(h));
  return out;
}

namespace {

StageBlock build_stage(const NetworkConfig& cfg, const SurrogateParams& sp,
                       const Eigen::VectorXd& phat, const Eigen::VectorXd& dhat,
                       bool first_stage) {
  StageBlock st;
  const int nx = kNh, nu = kNa;
  st.H = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  st.H.topLeftCorner(nx, nx) = 2.0 * sp.P.transpose() * sp.P;
  st.q.resize(nx + nu);
  st.q.head(nx) = sp.q;
  st.q.segment(nx, kNb) = phat;
  st.q.segment(nx + kNb, kNg) = -cfg.Y;
  st.q.tail(kNz) = cfg.kappa;

  st.A = Eigen::MatrixXd::Identity(nx, nx);
  st.B = cfg.A_in - cfg.A_out;
  st.c = Eigen::VectorXd::Zero(nx);

  st.Cx.resize(0, nx);
  st.Cu.resize(0, nu);
  st.ub.resize(0);
  append_box_rows(st.Cx, st.Cu, st.ub, false, Eigen::VectorXd::Zero(nu), cfg.action_upper(), nx,
                  nu);
  // outflow: A_out a - h <= 0
  {
    const int base = static_cast<int>(st.ub.size());
    st.Cx.conservativeResize(base + kNh, nx);
    st.Cu.conservativeResize(base + kNh, nu);
    st.ub.conservativeResize(base + kNh);
    st.Cx.bottomRows(kNh) = -Eigen::MatrixXd::Identity(nx, nx);
    st.Cu.bottomRows(kNh) = cfg.A_out;
    st.ub.tail(kNh).setZero();
  }
  // demand cap: g <= d_hat
  {
    const int base = static_cast<int>(st.ub.size());
    st.Cx.conservativeResize(base + kNg, nx);
    st.Cu.conservativeResize(base + kNg, nu);
    st.ub.conservativeResize(base + kNg);
    st.Cx.bottomRows(kNg).setZero();
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(kNg, nu);
    sel(0, kNb) = 1.0;
    sel(1, kNb + 1) = 1.0;
    st.Cu.bottomRows(kNg) = sel;
    st.ub.tail(kNg) = dhat;
  }
  if (!first_stage)
    append_box_rows(st.Cx, st.Cu, st.ub, true, Eigen::VectorXd::Zero(nx), cfg.h_max, nx, nu);
  add_uniqueness_reg(st);
  return st;
}

TerminalBlock build_terminal(const NetworkConfig& cfg, const SurrogateParams& sp) {
  TerminalBlock t;
  t.H = 2.0 * sp.P.transpose() * sp.P;
  t.q = sp.q;
  t.C.resize(0, kNh);
  t.ub.resize(0);
  Eigen::MatrixXd no_u(0, 0);
  append_box_rows(t.C, no_u, t.ub, true, Eigen::VectorXd::Zero(kNh), cfg.h_max, kNh, 0);
  add_uniqueness_reg(t);
  return t;
}

}  // namespace

StagedInstance build_surrogate(const NetworkConfig& cfg, const SurrogateParams& sp,
                               const std::vector<ExoSample>& forecast, const Eigen::VectorXd& h) {
  StagedInstance inst;
  inst.x0 = h;
  const int L = static_cast<int>(forecast.size());
  inst.stages.reserve(L);
  inst.slot.resize(L);
  inst.terminal_slot = L;
  for (int i = 0; i < L; ++i) {
    inst.stages.push_back(build_stage(cfg, sp, forecast[i].p, forecast[i].d, i == 0));
    inst.slot[i] = i;
  }
  inst.term = build_terminal(cfg, sp);
  return inst;
}

SupplyChainProgram::SupplyChainProgram(NetworkConfig cfg, ExogenousModel model)
    : cfg_(std::move(cfg)), model_(std::move(model)) {
  cfg_.validate();
  ce_ = model_.ce_forecast();
}

StagedInstance SupplyChainProgram::actor_instance(const Eigen::VectorXd& obs,
                                                  const ParamSchedule& theta, long t) const {
  if (obs.size() != 8) throw std::invalid_argument("supply chain observation must be 8-dim");
  const int t0 = theta.index_for(t);
  const int L = cfg_.horizon - t0;
  StagedInstance inst;
  inst.x0 = obs.head(4);
  inst.stages.reserve(L);
  inst.slot.resize(L);
  inst.terminal_slot = cfg_.horizon;
  for (int i = 0; i < L; ++i) {
    const int slot = t0 + i;
    const SurrogateParams sp = SurrogateParams::unpack(theta.stage(slot));
    Eigen::VectorXd phat = ce_.head(2), dhat = ce_.tail(2);
    if (i == 0) {
      phat = obs.segment(4, 2);
      dhat = obs.tail(2);
    }
    inst.stages.push_back(build_stage(cfg_, sp, phat, dhat, i == 0));
    inst.slot[i] = slot;
  }
  inst.term = build_terminal(cfg_, SurrogateParams::unpack(theta.stage(cfg_.horizon)));
  return inst;
}

Eigen::VectorXd SupplyChainProgram::reward_param_grad(const ParamSchedule& theta, int slot,
                                                      const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd&, bool) const {
  const SurrogateParams sp = SurrogateParams::unpack(theta.stage(slot));
  Eigen::VectorXd g(kParamDim);
  const Eigen::VectorXd Ph = sp.P * x;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g[i * 4 + j] = -2.0 * Ph[i] * x[j];
  g.tail(4) = -x;
  return g;
}

Eigen::MatrixXd SupplyChainProgram::reward_param_cross(const ParamSchedule& theta, int slot,
                                                       const Eigen::VectorXd& x,
                                                       const Eigen::VectorXd&,
                                                       bool terminal) const {
  const SurrogateParams sp = SurrogateParams::unpack(theta.stage(slot));
  const int rows = terminal ? 4 : 12;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, kParamDim);
  const Eigen::VectorXd Ph = sp.P * x;
  // d(grad_h reward)/d P_ij with grad_h reward = -2 P'P h - q
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(4);
      col[j] += Ph[i];
      col += sp.P.row(i).transpose() * x[j];
      c.block(0, i * 4 + j, 4, 1) = -2.0 * col;
    }
  for (int j = 0; j < 4; ++j) c(j, 16 + j) = -1.0;
  return c;
}

Dataset collect_dataset(const NetworkConfig& cfg, const ExogenousModel& model,
                        const SurrogateParams& behavior, int days, std::uint64_t seed) {
  if (days < 1) throw std::invalid_argument("collect_dataset: days must be >= 1");
  SupplyChainProgram prog(cfg, model);
  ParamSchedule theta(kParamDim, cfg.horizon, Eigen::VectorXd::Constant(kParamDim, -1e6),
                      Eigen::VectorXd::Constant(kParamDim, 1e6), true);
  theta.set_all(behavior.pack());

  Dataset ds;
  ds.n_s = 8;
  ds.n_a = 8;
  ds.horizon = cfg.horizon;
  ds.seed = seed;
  ds.transitions.reserve(days);

  const int T = cfg.horizon;
  int recorded = 0;
  for (int ep = 0; recorded < days; ++ep) {
    Rng rng = Rng::substream(seed, "episode", ep);
    const auto exo = draw_episode_exogenous(model, T + 1, rng);
    Eigen::VectorXd h = cfg.h0;
    for (int t = 0; t < T && recorded < days; ++t, ++recorded) {
      Eigen::VectorXd obs(8);
      obs << h, exo[t].p, exo[t].d;
      SolveResult res = solve_actor(prog, obs, theta, t);
      if (res.status != SolveStatus::Optimal) {
        std::ostringstream os;
        os << "behavior solve failed on day " << recorded << ": " << to_string(res.status)
           << " (kkt " << res.kkt_residual << ")";
        throw SolveError(res.status, os.str());
      }
      const Eigen::VectorXd a = prog.clamp_action(res.first_action());
      StepResult sr;
      try {
        sr = step(cfg, h, a, exo[t].p, exo[t].d);
      } catch (const EnvError& e) {
        throw EnvError("day " + std::to_string(recorded) + ": " + e.what());
      }
      Transition tr;
      tr.s = obs;
      tr.a = a;
      tr.r = sr.reward;
      tr.s_next.resize(8);
      tr.s_next << sr.h_next, exo[t + 1].p, exo[t + 1].d;
      tr.t = t;
      tr.episode_id = ep;
      ds.transitions.push_back(std::move(tr));
      h = sr.h_next;
    }
  }
  return ds;
}

std::vector<ExoSample> draw_episode_exogenous(const ExogenousModel& model, int horizon,
                                              Rng& rng) {
  std::vector<ExoSample> out;
  out.reserve(horizon);
  for (int t = 0; t < horizon; ++t) out.push_back(sample_exogenous(model, rng));
  return out;
}

namespace {

Eigen::VectorXd random_feasible_action(const NetworkConfig& cfg, const Eigen::VectorXd& h,
                                       const Eigen::VectorXd& d, Rng& rng) {
  Eigen::VectorXd a(kNa);
  for (int i = 0; i < kNb; ++i) a[i] = rng.uniform(0.0, cfg.b_max[i]);
  for (int i = 0; i < kNg; ++i) a[kNb + i] = rng.uniform(0.0, std::min(cfg.g_max[i], d[i]));
  for (int i = 0; i < kNz; ++i) a[kNb + kNg + i] = rng.uniform(0.0, cfg.z_max[i]);
  // scale per-node outflow into the available inventory
  for (int n = 0; n < kNh; ++n) {
    double out = 0.0;
    for (int j = 0; j < kNa; ++j) out += cfg.A_out(n, j) * a[j];
    if (out > h[n]) {
      const double f = out > 0 ? h[n] / out * (1.0 - 1e-12) : 0.0;
      for (int j = 0; j < kNa; ++j)
        if (cfg.A_out(n, j) > 0) a[j] *= f;
    }
  }
  return a;
}

}  // namespace

double simulate_episode(const NetworkConfig& cfg, const ExogenousModel& model,
                        const Policy& policy, const std::vector<ExoSample>& exo,
                        int episode_index) {
  SupplyChainProgram prog(cfg, model);
  ParamSchedule theta(kParamDim, cfg.horizon, Eigen::VectorXd::Constant(kParamDim, -1e6),
                      Eigen::VectorXd::Constant(kParamDim, 1e6), true);
  if (policy.kind == Policy::Kind::Surrogate) theta.set_all(policy.params.pack());
  Rng rand_rng = Rng::substream(policy.seed, "random-policy", episode_index);

  Eigen::VectorXd h = cfg.h0;
  double total = 0.0;
  const int T = cfg.horizon;
  for (int t = 0; t < T; ++t) {
    const ExoSample& w = exo[t];
    Eigen::VectorXd a;
    if (policy.kind == Policy::Kind::Surrogate) {
      Eigen::VectorXd obs(8);
      obs << h, w.p, w.d;
      SolveResult res = solve_actor(prog, obs, theta, t);
      if (res.status != SolveStatus::Optimal)
        throw SolveError(res.status, "policy solve failed at step " + std::to_string(t));
      a = prog.clamp_action(res.first_action());
    } else {
      a = random_feasible_action(cfg, h, w.d, rand_rng);
    }
    const StepResult sr = step(cfg, h, a, w.p, w.d);
    total += sr.reward;
    h = sr.h_next;
  }
  return total;
}

EvalResult evaluate_policy(const NetworkConfig& cfg, const ExogenousModel& model,
                           const Policy& policy, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  EvalResult out;
  out.returns.resize(episodes);
  parallel_for(episodes, [&](int i) {
    Rng rng = Rng::substream(seed, "eval-episode", i);
    const auto exo = draw_episode_exogenous(model, cfg.horizon, rng);
    out.returns[i] = simulate_episode(cfg, model, policy, exo, i);
  });
  double sum = 0.0;
  for (double r : out.returns) sum += r;
  out.mean = sum / episodes;
  if (episodes > 1) {
    double ss = 0.0;
    for (double r : out.returns) ss += (r - out.mean) * (r - out.mean);
    out.stddev = std::sqrt(ss / (episodes - 1));
  }
  return out;
}

std::pair<EvalResult, EvalResult> evaluate_paired(const NetworkConfig& cfg,
                                                  const ExogenousModel& model, const Policy& a,
                                                  const Policy& b, int episodes,
                                                  std::uint64_t seed) {
  EvalResult ra, rb;
  ra.returns.resize(episodes);
  rb.returns.resize(episodes);
  parallel_for(episodes, [&](int i) {
    Rng rng = Rng::substream(seed, "eval-episode", i);
    const auto exo = draw_episode_exogenous(model, cfg.horizon, rng);
    ra.returns[i] = simulate_episode(cfg, model, a, exo, i);
    rb.returns[i] = simulate_episode(cfg, model, b, exo, i);
  });
  auto finish = [&](EvalResult& r) {
    double sum = 0.0;
    for (double x : r.returns) sum += x;
    r.mean = sum / episodes;
    r.stddev = 0.0;
    if (episodes > 1) {
      double ss = 0.0;
      for (double x : r.returns) ss += (x - r.mean) * (x - r.mean);
      r.stddev = std::sqrt(ss / (episodes - 1));
    }
  };
  finish(ra);
  finish(rb);
  return {ra, rb};
}

}  // namespace iac::supply
