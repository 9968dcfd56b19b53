#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace dilab {

// Precondition violations surface as ValidationError; the CLI maps them to
// exit code 1 with a one-line diagnostic. Everything else is exit 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

// DI_LAB_THREADS caps worker threads; 0 or unset means hardware concurrency.
int thread_count();

// Runs fn on disjoint chunks [begin, end) of [0, count). Callers must make
// results independent of the partition (per-index writes or integer counts).
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Shortest-roundtrip-safe fixed formatting for CSV cells.
std::string fmt_double(double v);

}  // namespace dilab
