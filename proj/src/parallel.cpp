#include "kron/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "kron/errors.hpp"
#include "kron/rng.hpp"

namespace kron {

namespace {
std::atomic<int> g_workers{0};
}

int worker_count() {
  const int w = g_workers.load();
  return w > 0 ? w : resolve_worker_count(0);
}

void set_worker_count(int workers) {
  if (workers < 1) throw InputError("worker count must be at least 1");
  g_workers.store(workers);
}

int resolve_worker_count(int requested, int fallback) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KRON_DYSON_THREADS"); env && *env) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string("KRON_DYSON_THREADS must be a positive integer, got '") + env + "'");
  }
  if (fallback > 0) return fallback;
  return omp_get_max_threads();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

std::mt19937_64 substream(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(substream_seed(master, index));
}

}  // namespace kron
