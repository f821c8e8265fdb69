// AVX2/FMA variants. Complex doubles are interleaved (re, im), so one
// 256-bit register holds two amplitudes; real coefficients are widened to
// (c0, c0, c1, c1) before multiplying.
#include "twinfock/kernels.hpp"

#include <immintrin.h>

namespace twinfock::kernels {
namespace {

inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}
// (c[0], c[0], c[1], c[1])
inline __m256d widen2(const double* c) {
  const __m128d pair = _mm_loadu_pd(c);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(pair), 0b01010000);
}
inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void tridiag_apply_avx2(const double* d, const double* o, const cplx* x,
                        cplx* y, std::size_t n) {
  if (n < 4) {
    scalar_table().tridiag_apply(d, o, x, y, n);
    return;
  }
  y[0] = d[0] * x[0] + o[0] * x[1];
  std::size_t k = 1;
  // interior rows k, k+1 need o[k-1..k+1], x[k-1..k+2]
  for (; k + 2 < n; k += 2) {
    __m256d acc = _mm256_mul_pd(widen2(d + k), load2(x + k));
    acc = _mm256_fmadd_pd(widen2(o + k - 1), load2(x + k - 1), acc);
    acc = _mm256_fmadd_pd(widen2(o + k), load2(x + k + 1), acc);
    store2(y + k, acc);
  }
  for (; k + 1 < n; ++k)
    y[k] = o[k - 1] * x[k - 1] + d[k] * x[k] + o[k] * x[k + 1];
  y[n - 1] = o[n - 2] * x[n - 2] + d[n - 1] * x[n - 1];
}

double real_dot_avx2(const cplx* x, const cplx* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(load2(x + k), load2(y + k), acc0);
    acc1 = _mm256_fmadd_pd(load2(x + k + 2), load2(y + k + 2), acc1);
  }
  for (; k + 2 <= n; k += 2) acc0 = _mm256_fmadd_pd(load2(x + k), load2(y + k), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += x[k].real() * y[k].real() + x[k].imag() * y[k].imag();
  return s;
}

void axpy_real_avx2(double a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) store2(y + k, _mm256_fmadd_pd(va, load2(x + k), load2(y + k)));
  for (; k < n; ++k) y[k] += a * x[k];
}

void axpy_complex_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
  // (a.re + i a.im)(x.re + i x.im): re = a.re x.re - a.im x.im, im = a.re x.im + a.im x.re
  const __m256d are = _mm256_set1_pd(a.real());
  const __m256d aim = _mm256_set1_pd(a.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d vx = load2(x + k);
    const __m256d swapped = _mm256_permute_pd(vx, 0b0101);  // (im, re, im, re)
    const __m256d t = _mm256_mul_pd(aim, swapped);
    // addsub: lane0 re - , lane1 im +
    const __m256d prod = _mm256_fmaddsub_pd(are, vx, t);
    store2(y + k, _mm256_add_pd(load2(y + k), prod));
  }
  for (; k < n; ++k) y[k] += a * x[k];
}

double norm_sq_avx2(const cplx* x, std::size_t n) { return real_dot_avx2(x, x, n); }

double weighted_norm_sq_avx2(const double* w, const cplx* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d vx = load2(x + k);
    acc = _mm256_fmadd_pd(widen2(w + k), _mm256_mul_pd(vx, vx), acc);
  }
  double s = hsum(acc);
  for (; k < n; ++k) s += w[k] * std::norm(x[k]);
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{tridiag_apply_avx2, real_dot_avx2,
                                 axpy_real_avx2,     axpy_complex_avx2,
                                 norm_sq_avx2,       weighted_norm_sq_avx2};
  return &table;
}

}  // namespace twinfock::kernels
