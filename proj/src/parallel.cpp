#include "fractal_lab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fractal_lab {

namespace {

int env_threads() {
  const char* v = std::getenv("FRACTAL_LAB_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    const int n = std::stoi(v);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

std::atomic<int>& cap() {
  static std::atomic<int> value{env_threads()};
  return value;
}

}  // namespace

int thread_count() {
  const int c = cap().load(std::memory_order_relaxed);
  return c > 0 ? c : omp_get_max_threads();
}

void set_thread_cap(int threads) { cap().store(threads > 0 ? threads : env_threads(), std::memory_order_relaxed); }

}  // namespace fractal_lab
