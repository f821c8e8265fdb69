#include "twinfock/dynamics.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace twinfock;

namespace {

Eigen::VectorXcd to_eigen(const SpinorState& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dimension()));
  for (std::size_t i = 0; i < s.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = s.amplitudes()[i];
  return v;
}

double fidelity(const Eigen::VectorXcd& a, const SpinorState& b) {
  return std::norm(a.dot(to_eigen(b)));
}

Eigen::VectorXcd dense_exp(const Eigen::MatrixXd& h, const Eigen::VectorXcd& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
  Eigen::VectorXcd c = v.adjoint() * psi;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    c(i) *= std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * t * es.eigenvalues()(i)));
  return v * c;
}

SpinorState random_state(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> a(PairBasis(n).dimension());
  for (auto& x : a) x = {g(rng), g(rng)};
  SpinorState s(PairBasis(n), a);
  s.normalize();
  return s;
}

}  // namespace

TEST_CASE("ramp schedules") {
  const RampSchedule s = RampSchedule::fig_s1c_default(-3.0);
  CHECK(s.total_duration() == Catch::Approx(1.020).epsilon(1e-12));
  CHECK(s.q_start() == Catch::Approx(39.0));
  CHECK(s.q_end() == Catch::Approx(-4.8));
  CHECK(s.q_at(0.120) == Catch::Approx(7.2));
  CHECK(s.q_at(0.470) == Catch::Approx(4.8));
  CHECK(s.breakpoints().size() == 5);
  CHECK(s.time_scaled(0.5).total_duration() == Catch::Approx(0.51));
  CHECK(s.reversed().q_start() == Catch::Approx(-4.8));
  CHECK(s.reversed().reversed() == s);
  CHECK(RampSchedule::preset("linear_1020ms", -3.0).total_duration() == Catch::Approx(1.02));
  CHECK_THROWS_AS(RampSchedule::preset("nope", -3.0), std::invalid_argument);
  CHECK_THROWS_AS(RampSchedule({{0.1, 1.0, 2.0}, {0.1, 3.0, 4.0}}), std::invalid_argument);
  CHECK_THROWS_AS(RampSchedule({{-0.1, 1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("ground state matches dense diagonalization") {
  for (int n : {2, 3, 8, 50, 201}) {
    for (double q : {-20.0, -4.0, 0.0, 3.0, 30.0}) {
      const TridiagonalOperator h = build_hamiltonian({n, -3.0, q});
      const GroundState g = ground_state(h);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
      CHECK(g.energy == Catch::Approx(es.eigenvalues()(0)).margin(1e-9 * (1.0 + std::abs(es.eigenvalues()(0)))));
      const Eigen::VectorXcd ref = es.eigenvectors().col(0).cast<std::complex<double>>();
      CHECK(fidelity(ref, g.state) == Catch::Approx(1.0).margin(1e-10));
      CHECK(g.residual < 1e-9 * (1.0 + std::abs(g.energy)));
    }
  }
}

TEST_CASE("ground-state phases at N = 1000") {
  const GroundState polar = ground_state(build_hamiltonian({1000, -3.0, 39.0}));
  CHECK(pair_fraction(polar.state) < 1e-3);
  const GroundState twin = ground_state(build_hamiltonian({1000, -3.0, -30.0}));
  CHECK(pair_fraction(twin.state) > 0.99);
  // The polar ground state is close to, but not exactly, the bare |k = 0>.
  const double f = polar.state.fidelity(SpinorState::fock(PairBasis(1000), 0));
  CHECK(f > 0.99);
  CHECK(f < 1.0);
}

TEST_CASE("constant-q propagation matches dense exponentiation") {
  for (int n : {2, 5, 10}) {
    const ModelParams p{n, -3.0, 1.3};
    const SpinorState psi = random_state(n, static_cast<unsigned>(n));
    const SpinorState out = evolve_constant(psi, build_hamiltonian(p), 0.37);
    const Eigen::VectorXcd ref = dense_exp(dense_oracle(p).restricted(), to_eigen(psi), 0.37);
    CHECK(fidelity(ref, out) > 1.0 - 1e-10);
  }
  // Larger system: compare to Eigen on the tridiagonal matrix itself.
  const TridiagonalOperator h = build_hamiltonian({400, -3.0, 2.0});
  const SpinorState psi = random_state(400, 9);
  const SpinorState out = evolve_constant(psi, h, 0.8);
  CHECK(fidelity(dense_exp(h.dense(), to_eigen(psi), 0.8), out) > 1.0 - 1e-9);
  CHECK(out.norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("evolve keeps a polar ground state stationary") {
  const ModelParams p{1000, -3.0, 39.0};
  const GroundState g = ground_state(build_hamiltonian(p));
  const SweepResult r = evolve(g.state, p, RampSchedule::constant(39.0, 1.0));
  for (double o : r.ground_overlap_trace) CHECK(o > 0.999);
  CHECK(r.norm_deviation < 1e-8);
  CHECK(r.times.size() == r.pair_fraction_trace.size());
  CHECK(r.times.size() == r.ground_overlap_trace.size());
}

TEST_CASE("energy is conserved at constant q") {
  const ModelParams p{200, -3.0, 2.0};
  const TridiagonalOperator h = build_hamiltonian(p);
  const SpinorState psi = SpinorState::rotated_polar(PairBasis(200), 0.6);
  const double e0 = h.expectation(psi);
  const SweepResult r = evolve(psi, p, RampSchedule::constant(2.0, 1.0));
  CHECK(std::abs(h.expectation(r.final_state) - e0) <= 1e-6 * std::abs(e0));
}

TEST_CASE("time reversal with conjugation returns the initial state") {
  const ModelParams p{100, -3.0, 0.0};
  const RampSchedule s = RampSchedule::linear(12.0, -3.0, 0.2);
  const SpinorState psi = ground_state(build_hamiltonian(p.with_q(12.0))).state;
  StepControl c;
  c.ground_overlap = false;
  const SweepResult fwd = evolve(psi, p, s, c);
  const SweepResult back = evolve(fwd.final_state.conjugated(), p, s.reversed(), c);
  CHECK(back.final_state.conjugated().fidelity(psi) > 1.0 - 1e-6);
}

TEST_CASE("transfer orders slow and fast ramps") {
  const ModelParams p{1000, -3.0, 0.0};
  const RampSchedule s = RampSchedule::fig_s1c_default(-3.0);
  StepControl c;
  c.ground_overlap = false;
  const double start_q = s.q_start();
  const SpinorState g = ground_state(build_hamiltonian(p.with_q(start_q))).state;
  const double slow = evolve(g, p, s, c).pair_fraction_trace.back();
  const double fast = evolve(g, p, s.time_scaled(1.0 / 20.0), c).pair_fraction_trace.back();
  CHECK(slow >= 0.9);
  CHECK(fast < slow);
}

TEST_CASE("adiabatic limit: final ground-state overlap rises with the ramp duration") {
  const ModelParams p{20, -3.0, 0.0};
  const RampSchedule base = RampSchedule::linear(39.0, 0.0, 0.2);
  const SpinorState g = ground_state(build_hamiltonian(p.with_q(39.0))).state;
  double prev = -1.0;
  for (double scale : {1.0, 2.0, 4.0, 8.0}) {
    const SweepResult r = evolve(g, p, base.time_scaled(scale));
    const double o = r.ground_overlap_trace.back();
    CAPTURE(scale, o);
    CHECK(o > prev);
    prev = o;
  }
}

TEST_CASE("fixed-step and adaptive runs agree") {
  const ModelParams p{300, -3.0, 0.0};
  const RampSchedule s = RampSchedule::linear(9.0, -3.0, 0.3);
  const SpinorState g = ground_state(build_hamiltonian(p.with_q(9.0))).state;
  StepControl c;
  c.ground_overlap = false;
  const SweepResult a = evolve(g, p, s, c);
  const SweepResult f = evolve_fixed_step(g, p, s, c, a.accepted_dt / 4.0);
  CHECK(std::abs(a.pair_fraction_trace.back() - f.pair_fraction_trace.back()) < 1e-3);
}

TEST_CASE("phase scan locates both transitions and sharpens with N") {
  std::vector<double> q;
  for (int i = 0; i <= 240; ++i) q.push_back(-9.0 + 18.0 * i / 240);
  const PhaseScan big = phase_scan(1000, -3.0, q, 2);
  CHECK(big.upper_transition == Catch::Approx(2.0).margin(0.1));
  CHECK(big.lower_transition == Catch::Approx(-2.0).margin(0.1));
  const PhaseScan small = phase_scan(100, -3.0, q);
  CHECK(big.upper_peak_width < small.upper_peak_width);
  CHECK(big.lower_peak_width < small.lower_peak_width);
  for (double x : big.pair_fraction) CHECK((x >= 0.0 && x <= 1.0));
  std::vector<double> unsorted{0.0, 1.0, 3.0, 2.0, 4.0};
  CHECK_THROWS_AS(phase_scan(100, -3.0, unsorted), std::invalid_argument);
}

TEST_CASE("phase scan is independent of the worker count") {
  std::vector<double> q;
  for (int i = 0; i <= 60; ++i) q.push_back(-9.0 + 18.0 * i / 60);
  const PhaseScan a = phase_scan(200, -3.0, q, 1);
  const PhaseScan b = phase_scan(200, -3.0, q, 3);
  CHECK(a.pair_fraction == b.pair_fraction);
}

TEST_CASE("oscillation probe") {
  const ModelParams p{1000, -3.0, 0.0};
  const OscillationProbe frozen = oscillation_probe(p, RampSchedule::constant(39.0, 0.05));
  CHECK_FALSE(frozen.interior_maximum);
  for (double x : frozen.pair_fraction) CHECK(x == Catch::Approx(frozen.pair_fraction.front()).margin(1e-6));

  const RampSchedule s = RampSchedule::fig_s1c_default(-3.0);
  const OscillationProbe fast = oscillation_probe(p, s);
  const OscillationProbe slow = oscillation_probe(p, s.time_scaled(10.0));
  // A slower passage ends closer to the instantaneous ground state.
  const double target = pair_fraction(ground_state(build_hamiltonian(p.with_q(s.q_end()))).state);
  CHECK(std::abs(slow.final_value - target) < std::abs(fast.final_value - target));
  // Record which shape the shipped schedule produces.
  WARN("fig_s1c_default interior maximum: " << (fast.interior_maximum ? "yes" : "no") << ", max "
                                            << fast.max_value << " at " << fast.max_time << " s");
  CHECK_THROWS_AS(oscillation_probe(p, RampSchedule::linear(9.0, -7.0, 0.1)), std::invalid_argument);
}

TEST_CASE("interior maximum detector") {
  const std::vector<double> bump{0.0, 0.5, 1.0, 0.4, 0.2};
  CHECK(find_interior_maximum(bump, 1e-3) == 2);
  const std::vector<double> rise{0.0, 0.5, 1.0};
  CHECK(find_interior_maximum(rise, 1e-3) == -1);
}
