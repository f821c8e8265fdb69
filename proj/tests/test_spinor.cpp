#include "twinfock/spinor.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace twinfock;

TEST_CASE("pair basis dimension and occupations") {
  for (int n : {2, 3, 10, 11, 1000}) {
    const PairBasis b(n);
    CHECK(b.dimension() == static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 0; k < b.dimension(); ++k) {
      const auto occ = b.occupations(k);
      CHECK(occ[0] == occ[2]);
      CHECK(occ[0] + occ[1] + occ[2] == n);
    }
  }
  CHECK_THROWS_AS(PairBasis(1), std::invalid_argument);
  CHECK_THROWS_AS(build_hamiltonian({1, -3.0, 0.0}), std::invalid_argument);
}

TEST_CASE("N = 2 Hamiltonian has the closed-form elements") {
  const double omega = -3.0, q = 1.7;
  const TridiagonalOperator h = build_hamiltonian({2, omega, q});
  REQUIRE(h.dimension() == 2);
  CHECK(h.diagonal[0] == 0.0);
  // d_1 = (omega / 4)(2 * 0 - 1)(2) + 2 q
  CHECK(h.diagonal[1] == Catch::Approx(-omega / 2.0 + 2.0 * q).epsilon(1e-14));
  CHECK(h.off_diagonal[0] == Catch::Approx(omega / 2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("tridiagonal build equals the restricted dense oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int n = 2; n <= 12; ++n) {
    for (int t = 0; t < 10; ++t) {
      const ModelParams p{n, u(rng), u(rng)};
      const DenseOracle d = dense_oracle(p);
      CHECK((d.restricted() - build_hamiltonian(p).dense()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(d.commutator_with_magnetization() < 1e-12);
      CHECK((d.hamiltonian - d.hamiltonian.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + d.hamiltonian.cwiseAbs().maxCoeff()));
    }
  }
  const DenseOracle two = dense_oracle({2, -3.0, 0.0});
  CHECK(two.hamiltonian.rows() == 6);
  CHECK(two.restricted().rows() == 2);
  CHECK_THROWS_AS(dense_oracle({13, -3.0, 0.0}), std::invalid_argument);
}

TEST_CASE("Hamiltonian is linear in its couplings and d_0 vanishes") {
  const TridiagonalOperator a = build_hamiltonian({40, -3.0, 2.5});
  const TridiagonalOperator b = build_hamiltonian({40, -6.0, 5.0});
  for (std::size_t k = 0; k < a.dimension(); ++k) CHECK(b.diagonal[k] == 2.0 * a.diagonal[k]);
  for (std::size_t k = 0; k + 1 < a.dimension(); ++k) CHECK(b.off_diagonal[k] == 2.0 * a.off_diagonal[k]);
  CHECK(build_hamiltonian({40, 1.3, 0.0}).diagonal[0] == 0.0);
  const Eigen::MatrixXd m = a.dense();
  CHECK(m == m.transpose());
}

TEST_CASE("observables of Fock states and normalization checks") {
  const PairBasis b(10);
  CHECK(observables(SpinorState::fock(b, 0)).pair_fraction == 0.0);
  CHECK(observables(SpinorState::fock(b, 5)).pair_fraction == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(pair_fraction(SpinorState::fock(b, 2)) == Catch::Approx(0.4).epsilon(1e-15));
  const auto dist = observables(SpinorState::fock(b, 3)).pair_distribution;
  CHECK(dist[3] == 1.0);
  SpinorState s(b, std::vector<cplx>(6, cplx(1.0, 0.0)));
  CHECK_THROWS_AS(s.require_normalized(), std::invalid_argument);
  s.normalize();
  CHECK_NOTHROW(s.require_normalized());
  CHECK(s.norm() == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rotated polar state at pi/4 has the 25/50/25 expectation") {
  // Pair-basis projection: the projected distribution is binomial-like
  // and its mean pair fraction sits close to one half for large N.
  const PairBasis b(400);
  const SpinorState s = SpinorState::rotated_polar(b, std::numbers::pi / 4);
  CHECK_NOTHROW(s.require_normalized());
  CHECK(pair_fraction(s) == Catch::Approx(0.5).margin(0.01));
  CHECK(pair_fraction(SpinorState::rotated_polar(b, 0.0)) == 0.0);
}

TEST_CASE("expectation and spectral bounds") {
  const TridiagonalOperator h = build_hamiltonian({20, -3.0, 4.0});
  const auto [lo, hi] = h.spectral_bounds();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
  CHECK(lo <= es.eigenvalues().minCoeff());
  CHECK(hi >= es.eigenvalues().maxCoeff());
  const SpinorState f = SpinorState::fock(PairBasis(20), 3);
  CHECK(h.expectation(f) == Catch::Approx(h.diagonal[3]).epsilon(1e-14));
}
