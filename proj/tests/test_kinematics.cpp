#include "twinfock/kinematics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

using namespace twinfock;

TEST_CASE("equal trap frequencies give identical axes") {
  TrapConfig trap;
  trap.frequencies = {180.0, 180.0, 180.0};
  std::vector<double> t{0.0, 1e-3, 5e-3, 20e-3};
  for (const auto& s : scaling_expansion(trap, t)) {
    CHECK(std::abs(s.lambda[0] - s.lambda[1]) < 1e-9);
    CHECK(std::abs(s.lambda[0] - s.lambda[2]) < 1e-9);
  }
}

TEST_CASE("isotropic asymptotic expansion rate") {
  // lambda'' = w^2 / lambda^4 conserves lambda'^2 / 2 + w^2 / (3 lambda^3).
  TrapConfig trap;
  trap.frequencies = {100.0, 100.0, 100.0};
  const double w = 2.0 * std::numbers::pi * 100.0;
  const Vec3 r = asymptotic_rates(trap, 1.0);
  for (double x : r) CHECK(x == Catch::Approx(w * std::sqrt(2.0 / 3.0)).epsilon(1e-6));
  const ExpansionState s = expansion_at(trap, 0.0);
  CHECK(s.lambda[0] == 1.0);
  CHECK(s.lambda_dot[0] == 0.0);
}

TEST_CASE("sigma0 calibration reproduces the target velocity") {
  TrapConfig trap;
  const double s0 = calibrate_sigma0(trap, 1.8e-3);
  const Cloud cloud{trap, initial_sizes(trap, s0)};
  CHECK(cloud.asymptotic_velocity() == Catch::Approx(1.8e-3).epsilon(1e-6));
  const Vec3 sizes = initial_sizes(trap, s0);
  CHECK(geometric_mean(sizes) == Catch::Approx(s0).epsilon(1e-12));
  CHECK(sizes[0] * 150.0 == Catch::Approx(sizes[2] * 220.0).epsilon(1e-12));
}

TEST_CASE("short flashes reduce the velocity linearly in tau") {
  TrapConfig trap;
  const Cloud cloud{trap, initial_sizes(trap, calibrate_sigma0(trap, 1.8e-3))};
  const double v0 = cloud.asymptotic_velocity();
  auto reduction = [&](double tau) {
    const Cloud lensed{trap.with_flash(1e-3, tau), cloud.sigma0};
    return 1.0 - lensed.asymptotic_velocity() / v0;
  };
  const double r1 = reduction(2e-6), r2 = reduction(4e-6);
  CHECK(r1 > 0.0);
  CHECK(r2 / r1 == Catch::Approx(2.0).epsilon(0.02));
  const double tau = tau_for_reduction(cloud, 1e-3, 0.3, 400e-6);
  CHECK(reduction(tau) == Catch::Approx(0.3).margin(1e-4));
}

TEST_CASE("collimation scan finds an interior size minimum") {
  TrapConfig trap;
  const Cloud cloud{trap, initial_sizes(trap, calibrate_sigma0(trap, 1.8e-3))};
  std::vector<double> tau;
  for (int i = 0; i <= 40; ++i) tau.push_back(20e-6 * i);
  const CollimationScan s = collimation_scan(cloud, 1e-3, tau, 16e-3);
  CHECK(s.interior_minimum);
  CHECK(s.minimum_tau > 0.0);
  CHECK(s.minimum_tau < 800e-6);
  CHECK(s.operating_tau < s.minimum_tau);
  CHECK(s.size.front() > s.minimum_size);
  CHECK_THROWS_AS(trap.with_flash(-1e-3, 1e-4).validate(), std::invalid_argument);
}

TEST_CASE("pixel noise model") {
  PixelModel m;
  m.per_pixel_noise = 0.3;
  CHECK(m.noise_db(20e-6) - m.noise_db(10e-6) == Catch::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(m.noise_db(m.zero_db_size()) == Catch::Approx(0.0).margin(1e-12));
  const PixelModel c = calibrate_per_pixel_noise(m, 50e-6, -0.2);
  CHECK(c.noise_db(50e-6) == Catch::Approx(-0.2).epsilon(1e-12));
  PixelModel stepped = m;
  stepped.ceil_pixels = true;
  CHECK(stepped.pixels(10.1e-6) == std::pow(std::ceil(10.1e-6 * 4.0 / 5e-6), 2));
  CHECK_THROWS_AS(m.pixels(0.0), std::invalid_argument);
}

TEST_CASE("noise extrapolation curves") {
  PixelModel m = calibrate_per_pixel_noise({}, 30e-6, -0.2);
  const std::vector<ExpansionSetting> settings{{"frozen", 30e-6, 0.0}, {"free", 2e-6, 1.8e-3},
                                               {"slow", 2e-6, 0.4e-3}};
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(1e-3 * i);
  const auto curves = noise_extrapolation(settings, t, m);
  REQUIRE(curves.size() == 3);
  for (double x : curves[0].noise_db) CHECK(x == Catch::Approx(-0.2).epsilon(1e-12));
  CHECK(curves[0].zero_db_time == std::numeric_limits<double>::infinity());
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(curves[1].noise_db[i] > curves[1].noise_db[i - 1]);
  CHECK(curves[2].zero_db_time > curves[1].zero_db_time);
  CHECK(curves[2].zero_db_time / curves[1].zero_db_time == Catch::Approx(4.5).epsilon(1e-2));
}

TEST_CASE("effective temperatures") {
  const Constants c;
  const Temperatures t = effective_temperatures(0.4e-3, c);
  const double full = c.mass * 0.4e-3 * 0.4e-3 / c.k_boltzmann;
  CHECK(t.full == Catch::Approx(full).epsilon(1e-12));
  CHECK(t.half == Catch::Approx(full / 2.0).epsilon(1e-12));
  CHECK(t.full == Catch::Approx(1.672e-9).epsilon(1e-3));
}
