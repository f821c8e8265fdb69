#include "twinfock/rotation.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

using namespace twinfock;

namespace {

// exp(-i theta J_y) for spin j, index m + j. -i J_y is real and antisymmetric.
Eigen::MatrixXd dense_rotation(int j, double theta) {
  const int d = 2 * j + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    const double m = i - j;
    const double c = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    // -i J_y = -(J+ - J-)/2
    a(i + 1, i) = -0.5 * c;
    a(i, i + 1) = 0.5 * c;
  }
  return (theta * a).exp();
}

}  // namespace

TEST_CASE("pi/2 column matches the dense exponential") {
  for (int j = 0; j <= 10; ++j) {
    const Eigen::MatrixXd r = dense_rotation(j, std::numbers::pi / 2);
    const auto p = pi2_distribution(j);
    REQUIRE(p.size() == static_cast<std::size_t>(2 * j + 1));
    for (int i = 0; i <= 2 * j; ++i) CHECK(std::abs(p[i] - r(i, j) * r(i, j)) < 1e-10);
  }
}

TEST_CASE("k = 1 sector splits evenly between +-1") {
  const auto p = pi2_distribution(1);
  CHECK(p[0] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(p[1] == Catch::Approx(0.0).margin(1e-15));
  CHECK(p[2] == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("distributions are normalized, symmetric, parity-selected") {
  for (int j : {2, 7, 50, 333, 2325}) {
    const auto p = pi2_distribution(j);
    double total = 0.0;
    for (double x : p) total += x;
    CHECK(total == Catch::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i <= 2 * j; ++i) {
      CHECK(p[i] == Catch::Approx(p[2 * j - i]).margin(1e-15));
      if (i % 2 == 1) CHECK(p[i] == 0.0);
    }
    // <m^2> after the pi/2 rotation of |j, 0> is j (j + 1) / 2.
    CHECK(second_moment(p) == Catch::Approx(j * (j + 1.0) / 2.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(pi2_distribution(-1), std::invalid_argument);
}

TEST_CASE("phase-averaged general sector state matches the dense oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int j : {1, 3, 6, 10}) {
    std::vector<cplx> b(2 * j + 1);
    for (auto& x : b) x = {g(rng), g(rng)};
    double nrm = 0.0;
    for (auto& x : b) nrm += std::norm(x);
    const Eigen::MatrixXd r = dense_rotation(j, std::numbers::pi / 2);
    std::vector<double> ref(2 * j + 1, 0.0);
    for (int m = 0; m <= 2 * j; ++m)
      for (int mp = 0; mp <= 2 * j; ++mp) ref[mp] += std::norm(b[m]) / nrm * r(mp, m) * r(mp, m);
    const auto p = pi2_distribution(std::span<const cplx>(b));
    for (int i = 0; i <= 2 * j; ++i) CHECK(std::abs(p[i] - ref[i]) < 1e-10);
  }
  std::vector<cplx> even(4);
  CHECK_THROWS_AS(pi2_distribution(std::span<const cplx>(even)), std::invalid_argument);
}

TEST_CASE("gauge J_y has the spin matrix elements") {
  const TridiagonalOperator op = gauge_jy(3);
  REQUIRE(op.dimension() == 7);
  for (double d : op.diagonal) CHECK(d == 0.0);
  CHECK(std::abs(op.off_diagonal[0]) == Catch::Approx(0.5 * std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("rotating a superposition of pair sectors") {
  const PairBasis basis(20);
  std::vector<cplx> a(basis.dimension(), 0.0);
  a[1] = std::sqrt(0.3);
  a[4] = cplx(0.0, std::sqrt(0.7));
  const SpinorState s(basis, a);
  const auto sectors = rotate_pi2_distribution(s, 1e-12);
  REQUIRE(sectors.size() == 2);
  CHECK(sectors[0].k == 1);
  CHECK(sectors[0].weight == Catch::Approx(0.3));
  CHECK(sectors[1].k == 4);
  CHECK(sectors[1].probability == pi2_distribution(4));
}
