#include "twinfock/measurement.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace twinfock;

namespace {

SpinorState twin_fock(int n) { return SpinorState::fock(PairBasis(n), static_cast<std::size_t>(n / 2)); }

double jz_variance(const std::vector<CountRecord>& r) {
  double s = 0.0, s2 = 0.0;
  for (const auto& x : r) {
    const double j = 0.5 * (x.n_a - x.n_b);
    s += j;
    s2 += j * j;
  }
  const double n = static_cast<double>(r.size());
  return (s2 - s * s / n) / (n - 1.0);
}

}  // namespace

TEST_CASE("ideal twin-Fock records have no J_z fluctuation") {
  SamplingSpec spec;
  spec.shots = 500;
  const auto z = sample_jz(twin_fock(1000), spec, {});
  for (const auto& r : z) {
    CHECK(r.n_a == 500.0);
    CHECK(r.n_b == 500.0);
    CHECK(r.n_leftover == 0.0);
  }
  const auto p = sample_jperp(twin_fock(1000), spec, {});
  const SqueezingReport rep = squeezing_point(z, p);
  CHECK(rep.variance_jz == 0.0);
  CHECK(rep.xi2_floored);
  CHECK(rep.xi2_db == kDbFloor);
  CHECK(rep.entangled);
  CHECK(rep.jperp_fraction == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("imperfect transfer gives binomial J_z variance") {
  SamplingSpec spec;
  spec.shots = 20000;
  spec.transfer_efficiency = 0.9;
  const auto z = sample_jz(twin_fock(1000), spec, {});
  // D = k - Bin(k, eta): Var(J_z) = k eta (1 - eta) / 4
  CHECK(jz_variance(z) == Catch::Approx(500 * 0.9 * 0.1 / 4).epsilon(0.05));
}

TEST_CASE("coherent spin state reference sits at the standard quantum limit") {
  SamplingSpec spec;
  spec.shots = 40000;
  const auto z = css_reference(2000, Cycle::Jz, spec, {});
  const auto p = css_reference(2000, Cycle::Jperp, spec, {});
  const SqueezingReport rep = squeezing_point(z, p);
  CHECK(rep.number_squeezing == Catch::Approx(1.0).margin(0.03));
  CHECK(rep.xi2 == Catch::Approx(1.0).margin(0.05));
  CHECK(rep.mean_atoms == 2000.0);
}

TEST_CASE("conditional correction removes leftover-correlated noise") {
  SamplingSpec spec;
  spec.shots = 3000;
  spec.transfer_efficiency = 0.8;
  const auto z = sample_jz(twin_fock(1000), spec, {});
  const ConditionalResult c = conditional_correct(z);
  CHECK(c.beta == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(c.variance_after < 1e-12);
  CHECK(c.variance_before > 10.0);
  for (const auto& r : c.records) CHECK(r.n_leftover == 0.0);
  CHECK(jz_variance(c.records) < 1e-12);

  SamplingSpec ideal = spec;
  ideal.transfer_efficiency = 1.0;
  const ConditionalResult zero = conditional_correct(sample_jz(twin_fock(1000), ideal, {}));
  CHECK(zero.beta == 0.0);
  CHECK_FALSE(zero.warnings.empty());

  NoiseModel noisy;
  noisy.sigma_mode = 20.0;
  const ConditionalResult uncorrelated = conditional_correct(sample_jz(twin_fock(1000), ideal, noisy));
  CHECK(std::abs(uncorrelated.beta) < 0.1);
}

TEST_CASE("xi2 worsens with detection noise and improves with contrast") {
  SamplingSpec spec;
  spec.shots = 4000;
  spec.transfer_efficiency = 0.97;
  const SpinorState tf = twin_fock(2000);
  double prev = -1.0;
  for (double sigma : {0.0, 10.0, 20.0, 40.0}) {
    NoiseModel n;
    n.sigma_mode = sigma;
    n.contrast = 0.7;
    const double x = squeezing_point(sample_jz(tf, spec, n), sample_jperp(tf, spec, n)).xi2;
    CHECK(x > prev);
    prev = x;
  }
  prev = 1e9;
  for (double contrast : {0.3, 0.6, 0.9}) {
    NoiseModel n;
    n.sigma_mode = 20.0;
    n.contrast = contrast;
    const double x = squeezing_point(sample_jz(tf, spec, n), sample_jperp(tf, spec, n)).xi2;
    CHECK(x < prev);
    prev = x;
  }
}

TEST_CASE("records and reports do not depend on the worker count") {
  SamplingSpec spec;
  spec.shots = 1500;
  spec.seed = 99;
  spec.transfer_efficiency = 0.95;
  spec.efficiency_jitter = 0.01;
  spec.atom_number_jitter = 0.1;
  spec.source_atoms = 1e4;
  NoiseModel n;
  n.sigma_mode = 30.0;
  n.contrast = 0.7;
  const SpinorState tf = twin_fock(1000);
  const auto z1 = sample_jz(tf, spec, n);
  const auto p1 = sample_jperp(tf, spec, n);
  spec.workers = 4;
  CHECK(sample_jz(tf, spec, n) == z1);
  CHECK(sample_jperp(tf, spec, n) == p1);
  ReportOptions o1, o4;
  o1.bootstrap = o4.bootstrap = 200;
  o4.workers = 4;
  const SqueezingReport a = squeezing_report(z1, p1, o1);
  const SqueezingReport b = squeezing_report(z1, p1, o4);
  CHECK(a.xi2_ci.lo == b.xi2_ci.lo);
  CHECK(a.xi2_ci.hi == b.xi2_ci.hi);
  CHECK(a.xi2_ci.lo <= a.xi2);
  CHECK(a.xi2 <= a.xi2_ci.hi);
}

TEST_CASE("source atom rescaling keeps the twin-Fock split") {
  SamplingSpec spec;
  spec.shots = 200;
  spec.source_atoms = 1e4;
  const auto z = sample_jz(twin_fock(1000), spec, {});
  for (const auto& r : z) {
    CHECK(r.n_a == 5000.0);
    CHECK(r.n_b == 5000.0);
  }
}

TEST_CASE("invalid sampling inputs") {
  SamplingSpec spec;
  spec.shots = 0;
  CHECK_THROWS_AS(sample_jz(twin_fock(100), spec, {}), std::invalid_argument);
  spec.shots = 10;
  spec.transfer_efficiency = 0.0;
  CHECK_THROWS_AS(sample_jz(twin_fock(100), spec, {}), std::invalid_argument);
  spec.transfer_efficiency = 1.0;
  NoiseModel n;
  n.contrast = 0.0;
  CHECK_THROWS_AS(sample_jperp(twin_fock(100), spec, n), std::invalid_argument);
  CHECK_THROWS_AS(cycle_from_string("Jx"), std::invalid_argument);
  CHECK(cycle_from_string(to_string(Cycle::Jperp)) == Cycle::Jperp);
  const std::vector<CountRecord> one{{}};
  CHECK_THROWS_AS(squeezing_point(one, one), std::invalid_argument);
  bool floored = false;
  CHECK(to_db(1e-5, &floored) == kDbFloor);
  CHECK(floored);
  CHECK(to_db(0.5) == Catch::Approx(-3.0103).epsilon(1e-4));
}
