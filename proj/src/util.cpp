#include "dilab/util.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dilab {

int thread_count() {
  const char* env = std::getenv("DI_LAB_THREADS");
  long v = 0;
  if (env != nullptr) v = std::strtol(env, nullptr, 10);
  if (v <= 0) v = (long)std::thread::hardware_concurrency();
  if (v < 1) v = 1;
  return (int)v;
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>((std::size_t)thread_count(), count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace dilab
