// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "retasa/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace retasa::simd {
namespace {

// exp(x) for x <= 0 via the Cephes rational approximation on
// [-ln2/2, ln2/2] and exponent reconstruction. Lanes below -708 flush to 0.
inline __m256d
exp_nonpositive(__m256d x)
{
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000009e0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d one = _mm256_set1_pd(1.0);

  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lo);

  const __m256d k =
    _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(k, c1, x);
  x = _mm256_fnmadd_pd(k, c2, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(p0, xx, p1);
  px = _mm256_fmadd_pd(px, xx, p2);
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
  qx = _mm256_fmadd_pd(qx, xx, q2);
  qx = _mm256_fmadd_pd(qx, xx, q3);
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, one);

  // 2^k, k in [-1022, 0]
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i e = _mm256_cvtepi32_epi64(k32);
  e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
  e = _mm256_slli_epi64(e, 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(e));

  return _mm256_andnot_pd(underflow, r);
}

void
accumulate_sq_scaled_diff(double q,
                          const double* pts,
                          std::size_t n,
                          double inv_h,
                          double* acc)
{
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vh = _mm256_set1_pd(inv_h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_mul_pd(_mm256_sub_pd(vq, _mm256_loadu_pd(pts + i)), vh);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(u, u, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) {
    const double u = (q - pts[i]) * inv_h;
    acc[i] = std::fma(u, u, acc[i]);
  }
}

void
gaussian_from_sq(const double* acc, std::size_t n, double* out)
{
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp_nonpositive(_mm256_mul_pd(mhalf, _mm256_loadu_pd(acc + i))));
  if (i < n) {
    alignas(32) double tail[4] = { 0.0, 0.0, 0.0, 0.0 };
    std::copy(acc + i, acc + n, tail);
    alignas(32) double res[4];
    _mm256_store_pd(res, exp_nonpositive(_mm256_mul_pd(mhalf, _mm256_load_pd(tail))));
    std::copy(res, res + (n - i), out + i);
  }
}

void
multiply_epanechnikov(double q,
                      const double* pts,
                      std::size_t n,
                      double inv_h,
                      double* prod)
{
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vh = _mm256_set1_pd(inv_h);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_mul_pd(_mm256_sub_pd(vq, _mm256_loadu_pd(pts + i)), vh);
    const __m256d k = _mm256_max_pd(zero, _mm256_fnmadd_pd(u, u, one));
    _mm256_storeu_pd(prod + i, _mm256_mul_pd(_mm256_loadu_pd(prod + i), k));
  }
  for (; i < n; ++i) {
    const double u = (q - pts[i]) * inv_h;
    prod[i] *= std::max(0.0, std::fma(-u, u, 1.0));
  }
}

inline double
horizontal_sum(__m256d v)
{
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double
dot(const double* a, const double* b, std::size_t n)
{
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = horizontal_sum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

double
sum(const double* a, std::size_t n)
{
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_add_pd(_mm256_loadu_pd(a + i), s0);
    s1 = _mm256_add_pd(_mm256_loadu_pd(a + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_add_pd(_mm256_loadu_pd(a + i), s0);
  double s = horizontal_sum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i)
    s += a[i];
  return s;
}

void
scale(double* a, std::size_t n, double s)
{
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  for (; i < n; ++i)
    a[i] *= s;
}

} // namespace

const KernelTable&
avx2_kernel_table()
{
  static const KernelTable table{ "avx2",
                                  accumulate_sq_scaled_diff,
                                  gaussian_from_sq,
                                  multiply_epanechnikov,
                                  dot,
                                  sum,
                                  scale };
  return table;
}

} // namespace retasa::simd
