#pragma once

// Data-parallel loops with a serial reference path. Every parallel kernel in
// the library writes results by index, so both paths give identical output.

#include <cstddef>
#include <exception>
#include <mutex>

namespace kron {

enum class Execution { serial, parallel };

/// Worker count used by Execution::parallel (>= 1).
int worker_count();
void set_worker_count(int workers);
/// Resolves the worker count: explicit request (> 0), else KRON_DYSON_THREADS,
/// else `fallback` (> 0), else the OpenMP default.
int resolve_worker_count(int requested, int fallback = 0);

/// Calls body(i) for i in [0, count). Exceptions from the body are rethrown
/// (the one from the lowest failing index wins, for determinism).
template <class Body>
void parallel_for(std::size_t count, Body&& body, Execution exec = Execution::parallel) {
  if (exec == Execution::serial || worker_count() == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex guard;
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace kron
