#include "twinfock/kernels.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace twinfock;
using kernels::cplx;

namespace {

struct Data {
  std::vector<double> d, o, w;
  std::vector<cplx> x, y;
};

Data make_data(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Data r;
  r.d.resize(n);
  r.o.resize(n ? n - 1 : 0);
  r.w.resize(n);
  r.x.resize(n);
  r.y.resize(n);
  for (auto& v : r.d) v = 10.0 * u(rng);
  for (auto& v : r.o) v = 10.0 * u(rng);
  for (auto& v : r.w) v = std::abs(u(rng));
  for (auto& v : r.x) v = {u(rng), u(rng)};
  for (auto& v : r.y) v = {u(rng), u(rng)};
  return r;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar tridiagonal apply matches the definition") {
  const Data r = make_data(7, 3);
  std::vector<cplx> y(7);
  kernels::scalar_table().tridiag_apply(r.d.data(), r.o.data(), r.x.data(), y.data(), 7);
  for (std::size_t k = 0; k < 7; ++k) {
    cplx ref = r.d[k] * r.x[k];
    if (k > 0) ref += r.o[k - 1] * r.x[k - 1];
    if (k + 1 < 7) ref += r.o[k] * r.x[k + 1];
    CHECK(std::abs(y[k] - ref) < 1e-14);
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
#if defined(__x86_64__) || defined(_M_X64)
  if (!kernels::backend_available(kernels::Backend::Avx2)) SKIP("AVX2 not available on this machine");
  const auto& s = kernels::scalar_table();
  const auto& v = *kernels::avx2_table();
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 501u, 1024u}) {
    CAPTURE(n);
    const Data r = make_data(n, static_cast<unsigned>(n) + 11);
    const double scale = static_cast<double>(n) + 1.0;

    std::vector<cplx> ys(n), yv(n);
    if (n > 0) {
      s.tridiag_apply(r.d.data(), r.o.data(), r.x.data(), ys.data(), n);
      v.tridiag_apply(r.d.data(), r.o.data(), r.x.data(), yv.data(), n);
      CHECK(max_diff(ys, yv) <= 1e-13);
    }
    CHECK(std::abs(s.real_dot(r.x.data(), r.y.data(), n) - v.real_dot(r.x.data(), r.y.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(s.norm_sq(r.x.data(), n) - v.norm_sq(r.x.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(s.weighted_norm_sq(r.w.data(), r.x.data(), n) - v.weighted_norm_sq(r.w.data(), r.x.data(), n)) <=
          1e-14 * scale);

    std::vector<cplx> as = r.y, av = r.y;
    s.axpy_real(0.37, r.x.data(), as.data(), n);
    v.axpy_real(0.37, r.x.data(), av.data(), n);
    CHECK(max_diff(as, av) <= 1e-15);
    as = r.y;
    av = r.y;
    s.axpy_complex({0.3, -1.2}, r.x.data(), as.data(), n);
    v.axpy_complex({0.3, -1.2}, r.x.data(), av.data(), n);
    CHECK(max_diff(as, av) <= 1e-15);
  }
#else
  SKIP("not an x86-64 build");
#endif
}

TEST_CASE("backend selection can be pinned and restored") {
  const auto before = kernels::active_backend();
  kernels::set_backend(kernels::Backend::Scalar);
  CHECK(kernels::active_backend() == kernels::Backend::Scalar);
  CHECK(kernels::backend_name(kernels::Backend::Scalar) == "scalar");
  if (kernels::backend_available(kernels::Backend::Avx2)) {
    kernels::set_backend(kernels::Backend::Avx2);
    CHECK(kernels::active_backend() == kernels::Backend::Avx2);
  } else {
    CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::Avx2), std::invalid_argument);
  }
  kernels::set_backend(before);
}

TEST_CASE("span front-ends check sizes") {
  std::vector<double> d(3), o(1);
  std::vector<cplx> x(3), y(3);
  CHECK_THROWS_AS(kernels::tridiag_apply(d, o, x, y), std::invalid_argument);
  std::vector<cplx> z(2);
  CHECK_THROWS_AS(kernels::real_dot(x, z), std::invalid_argument);
}
