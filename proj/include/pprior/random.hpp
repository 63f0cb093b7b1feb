#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pprior/error.hpp"

namespace pprior {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed-splitting rule for parallel replicates:
///   stream(seed, index) = splitmix64(splitmix64(seed) + index)
/// Streams for distinct indices are decorrelated, and the mapping does not
/// depend on how replicates are scheduled across workers.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + index);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) { return Rng(stream_seed(seed, index)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Student-t variate with real df > 0 via the normal / gamma mixture
/// t = Z / sqrt(G / df), G ~ chi^2_df.
inline double sample_student_t(double df, Rng& rng) {
  if (!(df > 0.0)) fail(ErrorCode::Domain, "student-t degrees of freedom must be positive");
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double g = std::gamma_distribution<double>(0.5 * df, 2.0)(rng);
  return z / std::sqrt(g / df);
}

/// Worker count for replicate fan-out, read from PPRIOR_WORKERS (default 1).
inline unsigned worker_count() {
  if (const char* env = std::getenv("PPRIOR_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs body(i) for i in [0, count). Results must be written to per-index
/// slots by the caller; scheduling never affects output.
template <class Body>
void parallel_for(std::size_t count, Body&& body, unsigned workers = worker_count()) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pprior
