#include "twinfock/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace twinfock::kernels {

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(TWINFOCK_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("TWINFOCK_SIMD"); env && std::string(env) == "scalar")
    return Backend::Scalar;
  return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{nullptr};
  return table;
}

const KernelTable& table_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::Avx2) return *avx2_table();
#endif
  return scalar_table();
}

}  // namespace

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return avx2_table() != nullptr && cpu_has_avx2();
#else
  return false;
#endif
}

const KernelTable& active() {
  const KernelTable* t = current().load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &table_for(detect());
    current().store(t, std::memory_order_release);
  }
  return *t;
}

Backend active_backend() {
  return &active() == &scalar_table() ? Backend::Scalar : Backend::Avx2;
}

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(b)));
  current().store(&table_for(b), std::memory_order_release);
}

std::string_view backend_name(Backend b) {
  return b == Backend::Scalar ? "scalar" : "avx2";
}

namespace {
void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}
}  // namespace

void tridiag_apply(std::span<const double> diag, std::span<const double> off,
                   std::span<const cplx> x, std::span<cplx> y) {
  check_same(diag.size(), x.size());
  check_same(diag.size(), y.size());
  if (!diag.empty()) check_same(off.size() + 1, diag.size());
  active().tridiag_apply(diag.data(), off.data(), x.data(), y.data(), x.size());
}

double real_dot(std::span<const cplx> x, std::span<const cplx> y) {
  check_same(x.size(), y.size());
  return active().real_dot(x.data(), y.data(), x.size());
}

void axpy_real(double a, std::span<const cplx> x, std::span<cplx> y) {
  check_same(x.size(), y.size());
  active().axpy_real(a, x.data(), y.data(), x.size());
}

void axpy_complex(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  check_same(x.size(), y.size());
  active().axpy_complex(a, x.data(), y.data(), x.size());
}

double norm_sq(std::span<const cplx> x) { return active().norm_sq(x.data(), x.size()); }

double weighted_norm_sq(std::span<const double> w, std::span<const cplx> x) {
  check_same(w.size(), x.size());
  return active().weighted_norm_sq(w.data(), x.data(), x.size());
}

}  // namespace twinfock::kernels
