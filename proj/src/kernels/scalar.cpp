#include "twinfock/kernels.hpp"

namespace twinfock::kernels {
namespace {

void tridiag_apply_scalar(const double* d, const double* o, const cplx* x,
                          cplx* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = d[0] * x[0];
    return;
  }
  y[0] = d[0] * x[0] + o[0] * x[1];
  for (std::size_t k = 1; k + 1 < n; ++k)
    y[k] = o[k - 1] * x[k - 1] + d[k] * x[k] + o[k] * x[k + 1];
  y[n - 1] = o[n - 2] * x[n - 2] + d[n - 1] * x[n - 1];
}

double real_dot_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    s += x[k].real() * y[k].real() + x[k].imag() * y[k].imag();
  return s;
}

void axpy_real_scalar(double a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

void axpy_complex_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

double norm_sq_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::norm(x[k]);
  return s;
}

double weighted_norm_sq_scalar(const double* w, const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += w[k] * std::norm(x[k]);
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{tridiag_apply_scalar, real_dot_scalar,
                                 axpy_real_scalar,     axpy_complex_scalar,
                                 norm_sq_scalar,       weighted_norm_sq_scalar};
  return table;
}

}  // namespace twinfock::kernels
