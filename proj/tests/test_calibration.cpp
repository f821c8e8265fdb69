#include "twinfock/calibration.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace twinfock;

namespace {

constexpr double kOmega = -3.0;

std::vector<CalibrationPoint> exact_points(const DressingModel& m) {
  std::vector<CalibrationPoint> pts;
  for (int v : {2, 1, 0, -1, -2}) {
    const LandmarkKind kind = landmark_from_value(v);
    pts.push_back({kind, m.power_for(landmark_value(kind) * std::abs(kOmega)), Recipe::PolarStart});
  }
  return pts;
}

}  // namespace

TEST_CASE("dressing model and power lookup") {
  const DressingModel m{38.5, 50.0, 0.0};
  CHECK_NOTHROW(m.validate());
  CHECK(m.q(m.power_for(6.0)) == Catch::Approx(6.0).epsilon(1e-12));
  CHECK(m.power_for(38.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(m.power_for(-20.0), std::out_of_range);
  CHECK_THROWS_AS(m.power_for(40.0), std::out_of_range);
  CHECK_THROWS_AS((DressingModel{38.5, -1.0, 0.0}.validate()), std::invalid_argument);
  const DressingModel quad{38.5, 40.0, 20.0};
  CHECK(quad.q(quad.power_for(0.0)) == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("landmark names and values") {
  CHECK(landmark_value(LandmarkKind::Plus2) == 2.0);
  CHECK(landmark_value(LandmarkKind::Minus1) == -1.0);
  CHECK(landmark_from_value(0) == LandmarkKind::Zero);
  CHECK_THROWS_AS(landmark_from_value(3), std::invalid_argument);
  CHECK(default_protocol(LandmarkKind::Plus2).duration == Catch::Approx(0.09));
  CHECK(default_protocol(LandmarkKind::Minus1).duration == Catch::Approx(0.11));
  CHECK(default_protocol(LandmarkKind::Zero).duration == Catch::Approx(0.06));
}

TEST_CASE("linear fit recovers an exact model") {
  const DressingModel truth{38.5, 50.0, 0.0};
  const auto pts = exact_points(truth);
  const DressingFit fit = fit_dressing_model(pts, kOmega);
  CHECK(fit.model.kappa == Catch::Approx(50.0).epsilon(1e-6));
  CHECK(fit.model.q_zeeman == Catch::Approx(38.5).epsilon(1e-6));
  CHECK(fit.rms_residual < 1e-9);
  FitOptions fixed;
  fixed.fixed_q_zeeman = 38.5;
  CHECK(fit_dressing_model(pts, kOmega, fixed).model.kappa == Catch::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("fit is robust to 3% power jitter") {
  const DressingModel truth{38.5, 50.0, 0.0};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> jitter(0.0, 0.03);
  FitOptions fixed;
  fixed.fixed_q_zeeman = 38.5;
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = exact_points(truth);
    for (auto& p : pts) p.power = std::clamp(p.power * (1.0 + jitter(rng)), 0.0, 1.0);
    const DressingFit fit = fit_dressing_model(pts, kOmega, fixed);
    CHECK(std::abs(fit.model.kappa - 50.0) < 5.0);
  }
}

TEST_CASE("quadratic fit beats linear on curved data") {
  const DressingModel truth{38.5, 30.0, 25.0};
  const auto pts = exact_points(truth);
  FitOptions quad;
  quad.quadratic = true;
  const DressingFit l = fit_dressing_model(pts, kOmega);
  const DressingFit q = fit_dressing_model(pts, kOmega, quad);
  CHECK(q.rms_residual < l.rms_residual);
  CHECK(q.model.kappa2 == Catch::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("degenerate fits raise") {
  std::vector<CalibrationPoint> same{{LandmarkKind::Plus2, 0.5, Recipe::PolarStart},
                                     {LandmarkKind::Plus1, 0.5, Recipe::PolarStart},
                                     {LandmarkKind::Zero, 0.5, Recipe::PolarStart}};
  CHECK_THROWS_AS(fit_dressing_model(same, kOmega), std::invalid_argument);
  CHECK_THROWS_AS(fit_dressing_model(std::span(same).first(1), kOmega), std::invalid_argument);
  CHECK_THROWS_AS(fit_dressing_model(same, 0.0), std::invalid_argument);
}

TEST_CASE("power ramp follows q(P)") {
  const DressingModel m{38.5, 50.0, 10.0};
  const RampSchedule s = power_ramp_schedule(m, 0.1, 0.9, 0.5, 50);
  CHECK(s.total_duration() == Catch::Approx(0.5));
  CHECK(s.q_start() == Catch::Approx(m.q(0.1)));
  CHECK(s.q_end() == Catch::Approx(m.q(0.9)));
  CHECK(s.q_at(0.25) == Catch::Approx(m.q(0.5)).epsilon(1e-9));
}

TEST_CASE("simulated +2 landmark and out-of-range grid") {
  const ModelParams params{1000, kOmega, 0.0};
  const DressingModel m{38.5, 72.22, 0.0};
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.40 + 0.005 * i);
  const LandmarkCurve c = simulate_landmark(default_protocol(LandmarkKind::Plus2), params, m, grid);
  CHECK(c.located_q_over_omega == Catch::Approx(2.0).margin(0.05));
  CHECK(c.power.size() == grid.size());

  std::vector<double> low{0.0, 0.02, 0.04, 0.06};
  CHECK_THROWS_AS(simulate_landmark(default_protocol(LandmarkKind::Plus2), params, m, low),
                  LandmarkOutOfRange);
  std::vector<double> bad{0.3, 0.2, 0.4};
  CHECK_THROWS_AS(simulate_landmark(default_protocol(LandmarkKind::Plus2), params, m, bad),
                  std::invalid_argument);
}

TEST_CASE("recipe states") {
  const PairBasis b(100);
  CHECK(pair_fraction(recipe_state(Recipe::PolarStart, b)) == 0.0);
  CHECK(pair_fraction(recipe_state(Recipe::TwinFockStart, b)) == Catch::Approx(1.0));
  CHECK(pair_fraction(recipe_state(Recipe::RotatedStart, b)) == Catch::Approx(0.5).margin(0.02));
}
