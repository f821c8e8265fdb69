#pragma once

// Vector kernels used by the Krylov propagator and the observables.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from the CPU
// feature flags; set_backend() overrides it (tests pin both backends to
// check equivalence). TWINFOCK_SIMD=scalar in the environment forces the
// reference path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace twinfock::kernels {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  // y[k] = d[k] x[k] + o[k-1] x[k-1] + o[k] x[k+1]; off has n-1 entries.
  void (*tridiag_apply)(const double* diag, const double* off, const cplx* x,
                        cplx* y, std::size_t n);
  // Re <x|y>
  double (*real_dot)(const cplx* x, const cplx* y, std::size_t n);
  // y += a x, real a
  void (*axpy_real)(double a, const cplx* x, cplx* y, std::size_t n);
  // y += a x, complex a
  void (*axpy_complex)(cplx a, const cplx* x, cplx* y, std::size_t n);
  double (*norm_sq)(const cplx* x, std::size_t n);
  // sum_k w[k] |x[k]|^2
  double (*weighted_norm_sq)(const double* w, const cplx* x, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable* avx2_table();  // nullptr when not compiled in
#endif

bool backend_available(Backend b);
Backend active_backend();
// Throws std::invalid_argument when the requested backend is unavailable.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& active();

// Span front-ends over the active table.
void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const cplx> x, std::span<cplx> y);
double real_dot(std::span<const cplx> x, std::span<const cplx> y);
void axpy_real(double a, std::span<const cplx> x, std::span<cplx> y);
void axpy_complex(cplx a, std::span<const cplx> x, std::span<cplx> y);
double norm_sq(std::span<const cplx> x);
double weighted_norm_sq(std::span<const double> w, std::span<const cplx> x);

}  // namespace twinfock::kernels
