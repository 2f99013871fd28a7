#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

namespace fractal_lab {

/// Thread count used by every OpenMP region. Initialized from the
/// FRACTAL_LAB_THREADS environment variable (0 or unset = OpenMP default).
int thread_count();

/// Overrides the thread cap for the current process; 0 restores the default.
void set_thread_cap(int threads);

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
/// Each call must be a pure function of i; then the output does not depend
/// on the number of threads. An exception thrown by any call is rethrown
/// after the loop (the one with the lowest index wins).
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (std::int64_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = fn(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template <class T, class Fn>
std::vector<T> serial_map(std::size_t n, Fn&& fn) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
  return out;
}

}  // namespace fractal_lab
