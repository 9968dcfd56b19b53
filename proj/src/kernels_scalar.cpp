#include <cmath>

#include "dilab/kernels.hpp"
#include "dilab/rng.hpp"

namespace dilab::kernels {
namespace {

void sq_dist_scalar(const double* a, const double* pts, std::size_t count,
                    std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double* p = pts + i * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = a[d] - p[d];
      acc += t * t;
    }
    out[i] = acc;
  }
}

void tv_dist_scalar(const double* a, const double* pts, std::size_t count,
                    std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double* p = pts + i * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += std::fabs(a[d] - p[d]);
    out[i] = 0.5 * acc;
  }
}

void bhatta_scalar(const double* a, const double* pts, std::size_t count,
                   std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double* p = pts + i * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += std::sqrt(a[d] * p[d]);
    out[i] = acc;
  }
}

std::uint64_t mc_accept_scalar(const McJob& j) {
  std::uint64_t accepted = 0;
  for (std::uint64_t r = 0; r < j.count; ++r) {
    const std::uint64_t tkey = rng::mix(j.key + (j.first + r) * rng::kGamma);
    double score = 0.0;
    for (std::size_t i = 0; i < j.n; ++i) {
      const double u = rng::u01(rng::mix(tkey + (i + 1) * rng::kGamma));
      const double* row = j.cdf + i * j.ysize;
      // Inverse CDF: y = #{s < ysize-1 : row[s] <= u}.
      std::size_t y = 0;
      for (std::size_t s = 0; s + 1 < j.ysize; ++s) y += (row[s] <= u) ? 1 : 0;
      score += j.log2p[i * j.ysize + y];
    }
    accepted += (score >= j.lo && score <= j.hi) ? 1 : 0;
  }
  return accepted;
}

}  // namespace

const Table kScalar = {sq_dist_scalar, tv_dist_scalar, bhatta_scalar,
                       mc_accept_scalar, "scalar"};

}  // namespace dilab::kernels
