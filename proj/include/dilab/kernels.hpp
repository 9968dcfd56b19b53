#pragma once

#include <cstddef>
#include <cstdint>

// Batch kernels behind a runtime-dispatched table. The AVX2 variants
// vectorise across independent items (points, trials) and keep the
// within-item accumulation order identical to the scalar reference, so both
// tables produce bit-identical outputs; tests assert this exhaustively.
namespace dilab::kernels {

// Monte-Carlo typicality job: `count` trials starting at `first`. Each trial
// samples one output word from the per-letter CDF rows, scores it against the
// log2-probability rows, and is accepted iff the score lies in [lo, hi].
// Trial r, letter i consumes u01(mix(mix(key + r*kGamma) + (i+1)*kGamma)).
struct McJob {
  const double* cdf = nullptr;    // n x ysize, row-major, nondecreasing rows
  const double* log2p = nullptr;  // n x ysize, -inf for zero-probability
  std::size_t n = 0;
  std::size_t ysize = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t key = 0;
  std::uint64_t first = 0;
  std::uint64_t count = 0;
};

struct Table {
  // out[i] = sum_d (a[d] - pts[i*dim+d])^2
  void (*sq_dist)(const double* a, const double* pts, std::size_t count,
                  std::size_t dim, double* out);
  // out[i] = 0.5 * sum_d |a[d] - pts[i*dim+d]|
  void (*tv_dist)(const double* a, const double* pts, std::size_t count,
                  std::size_t dim, double* out);
  // out[i] = sum_d sqrt(a[d] * pts[i*dim+d]); inputs nonnegative
  void (*bhatta)(const double* a, const double* pts, std::size_t count,
                 std::size_t dim, double* out);
  std::uint64_t (*mc_accept)(const McJob& job);
  const char* name;
};

extern const Table kScalar;
extern const Table kAvx2;

bool cpu_has_avx2();

// Active table: DI_LAB_KERNELS=scalar|avx2|auto (default auto). Requesting
// avx2 on a CPU without it falls back to scalar.
const Table& active();

}  // namespace dilab::kernels
