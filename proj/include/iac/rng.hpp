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

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace iac {

/// Derives independent sub-stream seeds from a master seed so that every
/// consumer (data collection, training, evaluation, per-episode draws...)
/// gets its own reproducible stream regardless of scheduling order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named sub-stream `index` under `master`.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                                    std::uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(hash_name(name)) ^ splitmix64(index + 1));
}

/// Deterministic RNG wrapper. Normal/log-normal sampling is hand-rolled
/// (Box-Muller) instead of std::normal_distribution so that artifacts do not
/// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng substream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
    return Rng(substream_seed(master, name, index));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one value per call, cached pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace iac
