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
#include <stdexcept>
#include <vector>

namespace iac {

/// Stage parameter list ζ_0..ζ_T with the box Θ and the receding-horizon
/// index map. Column t of `stages` is ζ_t; the same per-coordinate box
/// applies at every stage. A tied schedule shares one parameter vector
/// across all stages (updates are broadcast; see Trainer).
class ParamSchedule {
 public:
  ParamSchedule() = default;
  ParamSchedule(int dim, int horizon, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                bool tied = false)
      : stages_(Eigen::MatrixXd::Zero(dim, horizon + 1)), lo_(lo), hi_(hi), tied_(tied) {
    if (horizon < 1) throw std::invalid_argument("ParamSchedule: horizon must be >= 1");
    if (lo.size() != dim || hi.size() != dim)
      throw std::invalid_argument("ParamSchedule: bound size mismatch");
    if (((hi - lo).array() < 0).any())
      throw std::invalid_argument("ParamSchedule: empty box");
  }

  int dim() const { return static_cast<int>(stages_.rows()); }
  int horizon() const { return static_cast<int>(stages_.cols()) - 1; }
  bool tied() const { return tied_; }

  const Eigen::MatrixXd& stages() const { return stages_; }
  Eigen::VectorXd stage(int t) const { return stages_.col(t); }
  void set_stage(int t, const Eigen::VectorXd& z) { stages_.col(t) = z; }

  /// Sets every stage to the same value (tied schedules and initialization).
  void set_all(const Eigen::VectorXd& z) {
    for (int t = 0; t <= horizon(); ++t) stages_.col(t) = z;
  }

  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }

  /// Wrap-around stage index for a global time: t - T*floor(t/T).
  static int index_for(long t, int T) { return static_cast<int>(t % T); }
  int index_for(long t) const { return index_for(t, horizon()); }

  /// Last time step of the lookahead instance containing global time t.
  /// Instances cover [t, horizon_end(t)]; a fresh full-length cycle starts
  /// whenever t is a multiple of T, so the instance length T - t%T is
  /// always in [1, T].
  static long horizon_end(long t, int T) { return T * (t / T + 1); }
  long horizon_end(long t) const { return horizon_end(t, horizon()); }
  int instance_length(long t) const { return horizon() - index_for(t); }

  /// Clamps every stage into the box Θ.
  void project() {
    for (int t = 0; t <= horizon(); ++t)
      stages_.col(t) = stages_.col(t).cwiseMax(lo_).cwiseMin(hi_);
  }

  bool inside_box(double tol = 0.0) const {
    for (int t = 0; t <= horizon(); ++t) {
      if ((stages_.col(t).array() < lo_.array() - tol).any()) return false;
      if ((stages_.col(t).array() > hi_.array() + tol).any()) return false;
    }
    return true;
  }

  /// Stage-major flattening [ζ_0; ζ_1; ...; ζ_T] in R^{d(T+1)}.
  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(stages_.size());
    for (int t = 0; t <= horizon(); ++t) out.segment(t * dim(), dim()) = stages_.col(t);
    return out;
  }
  void set_from_flat(const Eigen::VectorXd& v) {
    if (v.size() != stages_.size()) throw std::invalid_argument("flat size mismatch");
    for (int t = 0; t <= horizon(); ++t) stages_.col(t) = v.segment(t * dim(), dim());
  }

  int flat_size() const { return static_cast<int>(stages_.size()); }

 private:
  Eigen::MatrixXd stages_;
  Eigen::VectorXd lo_, hi_;
  bool tied_ = false;
};

}  // namespace iac
