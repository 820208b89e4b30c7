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

#include "iac/trainer.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "iac/io.hpp"
#include "iac/parallel.hpp"

namespace iac {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::IacStar: return "iac-star";
    case Variant::IacRp: return "iac-rp";
    case Variant::WIac: return "w-iac";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "iac-star") return Variant::IacStar;
  if (s == "iac-rp") return Variant::IacRp;
  if (s == "w-iac") return Variant::WIac;
  throw std::invalid_argument("unknown variant '" + s + "' (iac-star|iac-rp|w-iac)");
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (!(target_mix >= 0.0 && target_mix <= 1.0))
    throw std::invalid_argument("target_mix must be in [0,1]");
  if (!(td_lambda >= 0.0 && td_lambda <= 1.0))
    throw std::invalid_argument("td_lambda must be in [0,1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(actor_lr > 0.0)) throw std::invalid_argument("actor_lr must be > 0");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
  if (!(w_decay > 0.0)) throw std::invalid_argument("w_decay must be > 0");
}

namespace {

Eigen::VectorXd clamped_policy_action(const LookaheadProgram& prog, const SolveResult& res) {
  return prog.clamp_action(res.first_action());
}

[[noreturn]] void rethrow_with_sample(int i, const std::exception& e) {
  std::ostringstream os;
  os << "sample " << i << ": " << e.what();
  throw std::runtime_error(os.str());
}

}  // namespace

BatchValues evaluate_batch(const LookaheadProgram& prog, const Dataset& ds,
                           const ParamSchedule& theta, const SolveOptions& opts) {
  const int n = ds.size();
  BatchValues out;
  out.phi_data.resize(n);
  out.phi_pol.resize(n);
  out.phi_next.assign(n, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n, [&](int i) {
    try {
      const Transition& tr = ds.transitions[i];
      SolveResult rec = solve_actor(prog, tr.s, theta, tr.t, opts);
      if (rec.status != SolveStatus::Optimal)
        throw SolveError(rec.status, "receding solve: " + to_string(rec.status));
      const Eigen::VectorXd pi = clamped_policy_action(prog, rec);
      out.phi_data[i] = optimal_value(prog, tr.s, prog.clamp_action(tr.a), theta, opts);
      out.phi_pol[i] = optimal_value(prog, tr.s, pi, theta, opts);
      const bool chained =
          !ds.episode_end(i) && (ds.transitions[i + 1].s.array() == tr.s_next.array()).all();
      if (!chained) {
        SolveResult rec2 = solve_actor(prog, tr.s_next, theta, tr.t + 1, opts);
        if (rec2.status != SolveStatus::Optimal)
          throw SolveError(rec2.status, "next-state solve: " + to_string(rec2.status));
        out.phi_next[i] =
            optimal_value(prog, tr.s_next, clamped_policy_action(prog, rec2), theta, opts);
      }
    } catch (const std::exception& e) {
      rethrow_with_sample(i, e);
    }
  });
  for (int i = 0; i < n; ++i)
    if (std::isnan(out.phi_next[i])) out.phi_next[i] = out.phi_pol[i + 1];
  return out;
}

std::vector<double> lambda_returns(const Dataset& ds, const BatchValues& batch,
                                   const RwfParams& target, double gamma, double td_lambda) {
  const int n = ds.size();
  std::vector<double> y(n);
  double G = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double f_next = rwf_eval(batch.phi_next[i], target);
    if (ds.episode_end(i)) {
      G = ds.transitions[i].r + gamma * f_next;
    } else {
      G = ds.transitions[i].r + gamma * ((1.0 - td_lambda) * f_next + td_lambda * G);
    }
    y[i] = G;
  }
  return y;
}

double loss_L(const LookaheadProgram& prog, const Dataset& ds, const ParamSchedule& theta,
              const RwfParams& w, const SolveOptions& opts) {
  const BatchValues b = evaluate_batch(prog, ds, theta, opts);
  double sum = 0.0;
  for (int i = 0; i < ds.size(); ++i)
    sum += rwf_eval(b.phi_pol[i], w) - rwf_eval(b.phi_data[i], w);
  return sum / ds.size();
}

double loss_E(const LookaheadProgram& prog, const Dataset& ds, const ParamSchedule& theta,
              const RwfParams& w, const RwfParams& w_target, double gamma, double td_lambda,
              const SolveOptions& opts) {
  const BatchValues b = evaluate_batch(prog, ds, theta, opts);
  const std::vector<double> y = lambda_returns(ds, b, w_target, gamma, td_lambda);
  double sum = 0.0;
  for (int i = 0; i < ds.size(); ++i) {
    const double r = rwf_eval(b.phi_data[i], w) - y[i];
    sum += r * r;
  }
  return sum / ds.size();
}

CriticFit critic_update_closed_form(const BatchValues& batch, const std::vector<double>& targets,
                                    Variant variant, double beta, const RwfParams& prev) {
  const int n = static_cast<int>(batch.phi_data.size());
  CriticFit fit;
  fit.omega = prev;
  double m_phi = 0, m_phi2 = 0, m_y = 0, m_phiy = 0, g_L = 0;
  for (int i = 0; i < n; ++i) {
    const double phi = batch.phi_data[i];
    m_phi += phi;
    m_phi2 += phi * phi;
    m_y += targets[i];
    m_phiy += phi * targets[i];
    g_L += batch.phi_pol[i] - phi;
  }
  m_phi /= n;
  m_phi2 /= n;
  m_y /= n;
  m_phiy /= n;
  g_L /= n;
  fit.m_phi = m_phi;
  fit.m_phi2 = m_phi2;
  fit.m_y = m_y;
  fit.m_phiy = m_phiy;
  fit.g_L = (variant == Variant::IacStar) ? 0.0 : g_L;

  const double var_phi = m_phi2 - m_phi * m_phi;
  if (var_phi < 1e-12 * std::max(1.0, m_phi2)) {
    std::cerr << "[iac] critic update: singular normal equations (constant phi); "
                 "keeping previous omega\n";
    fit.singular = true;
    return fit;
  }
  const double c1 = fit.g_L;
  const double bE = (variant == Variant::IacStar) ? 1.0 : beta;
  const double lo1 = 0.0, hi1 = prev.slope_cap;
  const double lo2 = -prev.bias_cap, hi2 = prev.bias_cap;

  // objective f(w1,w2) = c1 w1 + bE * mean((w1 phi + w2 - y)^2)
  auto objective = [&](double w1, double w2) {
    const double quad = w1 * w1 * m_phi2 + w2 * w2 + 2.0 * w1 * w2 * m_phi -
                        2.0 * w1 * m_phiy - 2.0 * w2 * m_y;
    return c1 * w1 + bE * quad;
  };

  std::vector<std::pair<double, double>> cands;
  if (bE > 0.0) {
    // interior stationary point of the 2x2 system
    const double det = m_phi2 - m_phi * m_phi;
    const double rhs1 = m_phiy - c1 / (2.0 * bE);
    const double rhs2 = m_y;
    const double w1 = (rhs1 - m_phi * rhs2) / det;
    const double w2 = rhs2 - m_phi * w1;
    cands.emplace_back(w1, w2);
    // face minimizers
    for (double w1f : {lo1, hi1}) cands.emplace_back(w1f, m_y - w1f * m_phi);
    for (double w2f : {lo2, hi2})
      cands.emplace_back((m_phiy - w2f * m_phi - c1 / (2.0 * bE)) / m_phi2, w2f);
  }
  for (double w1f : {lo1, hi1})
    for (double w2f : {lo2, hi2}) cands.emplace_back(w1f, w2f);

  double best = std::numeric_limits<double>::infinity();
  for (auto [w1, w2] : cands) {
    w1 = std::clamp(w1, lo1, hi1);
    w2 = std::clamp(w2, lo2, hi2);
    const double f = objective(w1, w2);
    if (f < best) {
      best = f;
      fit.omega.slope = w1;
      fit.omega.bias = w2;
    }
  }
  return fit;
}

Eigen::VectorXd actor_loss_gradient(const LookaheadProgram& prog, const Dataset& ds,
                                    const ParamSchedule& theta, const RwfParams& w,
                                    const TrainConfig& cfg) {
  const int n = ds.size();
  const int D = theta.flat_size();
  std::vector<Eigen::VectorXd> slots(n);
  parallel_for(n, [&](int i) {
    try {
      const Transition& tr = ds.transitions[i];
      const Eigen::VectorXd a_cl = prog.clamp_action(tr.a);

      StagedInstance inst = prog.actor_instance(tr.s, theta, tr.t);
      SolveResult res = solve(inst, cfg.solve);
      if (res.status != SolveStatus::Optimal)
        throw SolveError(res.status, "actor gradient solve: " + to_string(res.status));
      ValueGradient g_pol = envelope_gradient(prog, theta, inst, res);
      if (g_pol.degenerate && cfg.fd_fallback)
        g_pol.grad = actor_value_gradient_fd(prog, tr.s, theta, tr.t);

      ValueGradient g_dat = value_gradient(prog, tr.s, a_cl, theta, cfg.solve);
      if (g_dat.degenerate && cfg.fd_fallback)
        g_dat.grad = value_gradient_fd(prog, tr.s, a_cl, theta);

      slots[i] = w.slope * (g_pol.grad - g_dat.grad);
      if (!slots[i].allFinite()) throw std::runtime_error("non-finite gradient");
    } catch (const std::exception& e) {
      rethrow_with_sample(i, e);
    }
  });
  Eigen::VectorXd g = Eigen::VectorXd::Zero(D);
  for (int i = 0; i < n; ++i) g += slots[i];
  return g / n;
}

Trainer::Trainer(const LookaheadProgram& prog, const Dataset& ds, TrainConfig cfg,
                 ParamSchedule prototype)
    : prog_(prog), ds_(ds), cfg_(std::move(cfg)), proto_(std::move(prototype)) {
  cfg_.validate();
  if (ds_.empty()) throw std::invalid_argument("Trainer: empty dataset");
  if (proto_.dim() != prog.param_dim() || proto_.horizon() != prog.horizon())
    throw std::invalid_argument("Trainer: schedule prototype does not match the program");
}

TrainState Trainer::initial_state() const {
  TrainState st;
  st.theta = proto_;
  st.theta.set_all(0.5 * (proto_.lower() + proto_.upper()));
  st.theta_target = st.theta;
  st.omega = RwfParams{1.0, 0.0, cfg_.slope_cap, cfg_.bias_cap};
  st.omega_target = st.omega;
  return st;
}

CriticFit Trainer::critic_update(TrainState& st) {
  batch_ = evaluate_batch(prog_, ds_, st.theta, cfg_.solve);
  targets_ = lambda_returns(ds_, batch_, st.omega_target, cfg_.gamma, cfg_.td_lambda);
  CriticFit fit = critic_update_closed_form(batch_, targets_, cfg_.variant, cfg_.beta, st.omega);
  st.omega = fit.omega;
  const double a = cfg_.target_mix;
  st.omega_target.slope = a * st.omega_target.slope + (1.0 - a) * st.omega.slope;
  st.omega_target.bias = a * st.omega_target.bias + (1.0 - a) * st.omega.bias;
  return fit;
}

Eigen::VectorXd Trainer::effective_gradient(const Eigen::VectorXd& flat) const {
  const int d = prog_.param_dim();
  const int T = prog_.horizon();
  if (!ds_.empty() && flat.size() != d * (T + 1))
    throw std::logic_error("effective_gradient: size mismatch");
  Eigen::VectorXd g = flat;
  if (cfg_.variant == Variant::WIac) {
    double wt = 1.0;
    for (int t = 0; t <= T; ++t, wt *= cfg_.w_decay) g.segment(t * d, d) *= wt;
  }
  return g;
}

void Trainer::adam_step(TrainState& st, const Eigen::VectorXd& g_eff) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (st.adam_m.size() != g_eff.size()) {
    st.adam_m = Eigen::VectorXd::Zero(g_eff.size());
    st.adam_v = Eigen::VectorXd::Zero(g_eff.size());
    st.adam_steps = 0;
  }
  ++st.adam_steps;
  st.adam_m = b1 * st.adam_m + (1.0 - b1) * g_eff;
  st.adam_v = b2 * st.adam_v.array().matrix() + (1.0 - b2) * g_eff.cwiseProduct(g_eff);
  const double mc = 1.0 - std::pow(b1, static_cast<double>(st.adam_steps));
  const double vc = 1.0 - std::pow(b2, static_cast<double>(st.adam_steps));
  Eigen::VectorXd step =
      cfg_.actor_lr * (st.adam_m / mc).array().matrix().cwiseQuotient(
          ((st.adam_v / vc).cwiseSqrt().array() + eps).matrix());

  const int d = prog_.param_dim();
  const int T = prog_.horizon();
  if (st.theta.tied()) {
    // ascent step on the shared parameter
    Eigen::VectorXd z = st.theta.stage(0) + step;
    st.theta.set_all(z);
  } else {
    Eigen::VectorXd flat = st.theta.flatten();
    if (cfg_.variant == Variant::WIac) {
      // per-stage step scaling: Adam's per-coordinate normalization would
      // wash out a gradient pre-scale, so the weighting applies to the step
      double wt = 1.0;
      for (int t = 0; t <= T; ++t, wt *= cfg_.w_decay) step.segment(t * d, d) *= wt;
    }
    flat += step;
    st.theta.set_from_flat(flat);
  }
  st.theta.project();
}

void Trainer::actor_update(TrainState& st) {
  const int d = prog_.param_dim();
  const int T = prog_.horizon();
  for (int step = 0; step < cfg_.inner_steps; ++step) {
    const Eigen::VectorXd flat_g = actor_loss_gradient(prog_, ds_, st.theta, st.omega, cfg_);
    Eigen::VectorXd g_eff;
    if (st.theta.tied()) {
      // reduce stage contributions onto the shared parameter (W-iAC weights
      // applied before the reduction, where stages still exist)
      const Eigen::VectorXd weighted = effective_gradient(flat_g);
      g_eff = Eigen::VectorXd::Zero(d);
      for (int t = 0; t <= T; ++t) g_eff += weighted.segment(t * d, d);
    } else {
      g_eff = flat_g;
    }
    adam_step(st, g_eff);
  }
  const double a = cfg_.target_mix;
  for (int t = 0; t <= T; ++t)
    st.theta_target.set_stage(t, a * st.theta_target.stage(t) + (1.0 - a) * st.theta.stage(t));
}

TrainState Trainer::train(const Evaluator& evaluator, int eval_every) {
  TrainState st = initial_state();
  const int K = cfg_.iterations;
  for (int k = 0; k <= K; ++k) {
    st.iteration = k;
    critic_update(st);

    IterationDiag diag;
    diag.iteration = k;
    double sum_gap = 0.0, sum_sq = 0.0, sum_res = 0.0;
    const int n = ds_.size();
    for (int i = 0; i < n; ++i) {
      sum_gap += rwf_eval(batch_.phi_pol[i], st.omega) - rwf_eval(batch_.phi_data[i], st.omega);
      const double r = rwf_eval(batch_.phi_data[i], st.omega) - targets_[i];
      sum_sq += r * r;
      const double one_step = rwf_eval(batch_.phi_data[i], st.omega) -
                              (ds_.transitions[i].r + cfg_.gamma * rwf_eval(batch_.phi_next[i], st.omega));
      sum_res += std::abs(one_step);
    }
    diag.loss_L = sum_gap / n;
    diag.loss_E = sum_sq / n;
    diag.bellman_residual = sum_res / n;
    const bool eval_now =
        evaluator && (k == K || (eval_every > 0 && k % eval_every == 0));
    if (eval_now) {
      const auto [mean, sd] = evaluator(st.theta);
      diag.eval_return_mean = mean;
      diag.eval_return_std = sd;
    }
    st.diagnostics.push_back(diag);

    if (k == K) break;
    actor_update(st);
  }
  return st;
}

std::string diagnostics_csv(const std::vector<IterationDiag>& diags, const std::string& version) {
  std::ostringstream out;
  out << "# " << version << "\n";
  out << "iteration,loss_L,loss_E,bellman_residual,eval_return_mean,eval_return_std\n";
  for (const auto& d : diags) {
    out << d.iteration << "," << format_double(d.loss_L) << "," << format_double(d.loss_E) << ","
        << format_double(d.bellman_residual) << ",";
    if (d.eval_return_mean) out << format_double(*d.eval_return_mean);
    out << ",";
    if (d.eval_return_std) out << format_double(*d.eval_return_std);
    out << "\n";
  }
  return out.str();
}

}  // namespace iac
