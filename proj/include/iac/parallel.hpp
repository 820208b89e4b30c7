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

#include <algorithm>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace iac {

/// Global worker cap applied by every parallel kernel (0 = hardware default).
/// The CLI sets this from --threads.
int& thread_cap();

inline int effective_threads() {
#ifdef _OPENMP
  int n = thread_cap() > 0 ? thread_cap() : omp_get_max_threads();
  return std::max(1, n);
#else
  return 1;
#endif
}

/// Runs f(i) for i in [0, n). Each task writes only to its own output slot,
/// so results are bit-identical for any thread count; callers reduce the
/// slots in index order afterwards. Exceptions are captured and rethrown
/// (first one wins) after the loop completes.
template <class F>
void parallel_for(int n, F&& f) {
  if (n <= 0) return;
  const int nthreads = effective_threads();
  if (nthreads == 1 || n == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err = nullptr;
  std::mutex err_mu;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace iac
