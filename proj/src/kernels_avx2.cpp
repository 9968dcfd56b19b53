#include <immintrin.h>

#include "dilab/kernels.hpp"
#include "dilab/rng.hpp"

// Four independent items per vector, one lane each; per-item operation order
// matches kernels_scalar.cpp exactly, so results are bit-identical. Tails
// delegate to the scalar table. No transcendentals are used in lanes
// (sqrt/div are correctly rounded; everything else is add/mul/compare).
namespace dilab::kernels {
namespace {

inline __m256i mullo64(__m256i a, __m256i b) {
  // 64-bit low product from 32-bit halves (no _mm256_mullo_epi64 in AVX2).
  const __m256i ahi = _mm256_srli_epi64(a, 32);
  const __m256i bhi = _mm256_srli_epi64(b, 32);
  const __m256i ll = _mm256_mul_epu32(a, b);
  const __m256i lh = _mm256_mul_epu32(a, bhi);
  const __m256i hl = _mm256_mul_epu32(ahi, b);
  const __m256i cross = _mm256_add_epi64(lh, hl);
  return _mm256_add_epi64(ll, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64(__m256i z) {
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
  z = mullo64(z, _mm256_set1_epi64x(0xBF58476D1CE4E5B9ull));
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
  z = mullo64(z, _mm256_set1_epi64x(0x94D049BB133111EBull));
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
  return z;
}

inline __m256d u01v(__m256i h) {
  // (h >> 12) * 2^-52 computed exactly as (1.0 | mantissa) - 1.0.
  const __m256i m = _mm256_srli_epi64(h, 12);
  const __m256i bits =
      _mm256_or_si256(m, _mm256_set1_epi64x(0x3FF0000000000000ll));
  return _mm256_sub_pd(_mm256_castsi256_pd(bits), _mm256_set1_pd(1.0));
}

inline __m256i point_index(std::size_t dim) {
  return _mm256_set_epi64x(3 * (long long)dim, 2 * (long long)dim,
                           (long long)dim, 0);
}

void sq_dist_avx2(const double* a, const double* pts, std::size_t count,
                  std::size_t dim, double* out) {
  const std::size_t main = count & ~std::size_t(3);
  const __m256i idx = point_index(dim);
  for (std::size_t i = 0; i < main; i += 4) {
    const double* base = pts + i * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d va = _mm256_set1_pd(a[d]);
      const __m256d vp = _mm256_i64gather_pd(base + d, idx, 8);
      const __m256d t = _mm256_sub_pd(va, vp);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (main < count)
    kScalar.sq_dist(a, pts + main * dim, count - main, dim, out + main);
}

void tv_dist_avx2(const double* a, const double* pts, std::size_t count,
                  std::size_t dim, double* out) {
  const std::size_t main = count & ~std::size_t(3);
  const __m256i idx = point_index(dim);
  const __m256d signmask = _mm256_set1_pd(-0.0);
  for (std::size_t i = 0; i < main; i += 4) {
    const double* base = pts + i * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d va = _mm256_set1_pd(a[d]);
      const __m256d vp = _mm256_i64gather_pd(base + d, idx, 8);
      acc = _mm256_add_pd(acc,
                          _mm256_andnot_pd(signmask, _mm256_sub_pd(va, vp)));
    }
    _mm256_storeu_pd(out + i, _mm256_mul_pd(acc, _mm256_set1_pd(0.5)));
  }
  if (main < count)
    kScalar.tv_dist(a, pts + main * dim, count - main, dim, out + main);
}

void bhatta_avx2(const double* a, const double* pts, std::size_t count,
                 std::size_t dim, double* out) {
  const std::size_t main = count & ~std::size_t(3);
  const __m256i idx = point_index(dim);
  for (std::size_t i = 0; i < main; i += 4) {
    const double* base = pts + i * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d va = _mm256_set1_pd(a[d]);
      const __m256d vp = _mm256_i64gather_pd(base + d, idx, 8);
      acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_mul_pd(va, vp)));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (main < count)
    kScalar.bhatta(a, pts + main * dim, count - main, dim, out + main);
}

std::uint64_t mc_accept_avx2(const McJob& j) {
  const std::uint64_t main = j.count & ~std::uint64_t(3);
  const __m256i gamma = _mm256_set1_epi64x((long long)rng::kGamma);
  std::uint64_t accepted = 0;
  for (std::uint64_t r = 0; r < main; r += 4) {
    const std::uint64_t t0 = j.first + r;
    __m256i ctr = _mm256_add_epi64(
        _mm256_set1_epi64x((long long)t0),
        _mm256_set_epi64x(3, 2, 1, 0));
    __m256i tkey =
        mix64(_mm256_add_epi64(_mm256_set1_epi64x((long long)j.key),
                               mullo64(ctr, gamma)));
    __m256d score = _mm256_setzero_pd();
    for (std::size_t i = 0; i < j.n; ++i) {
      const __m256i h = mix64(_mm256_add_epi64(
          tkey, mullo64(_mm256_set1_epi64x((long long)(i + 1)), gamma)));
      const __m256d u = u01v(h);
      const double* row = j.cdf + i * j.ysize;
      __m256i y = _mm256_setzero_si256();
      for (std::size_t s = 0; s + 1 < j.ysize; ++s) {
        const __m256d le =
            _mm256_cmp_pd(_mm256_set1_pd(row[s]), u, _CMP_LE_OQ);
        y = _mm256_sub_epi64(y, _mm256_castpd_si256(le));
      }
      const __m256d lp = _mm256_i64gather_pd(j.log2p + i * j.ysize, y, 8);
      score = _mm256_add_pd(score, lp);
    }
    const __m256d ok = _mm256_and_pd(
        _mm256_cmp_pd(score, _mm256_set1_pd(j.lo), _CMP_GE_OQ),
        _mm256_cmp_pd(score, _mm256_set1_pd(j.hi), _CMP_LE_OQ));
    accepted += (std::uint64_t)__builtin_popcount(_mm256_movemask_pd(ok));
  }
  if (main < j.count) {
    McJob tail = j;
    tail.first = j.first + main;
    tail.count = j.count - main;
    accepted += kScalar.mc_accept(tail);
  }
  return accepted;
}

}  // namespace

const Table kAvx2 = {sq_dist_avx2, tv_dist_avx2, bhatta_avx2, mc_accept_avx2,
                     "avx2"};

}  // namespace dilab::kernels
