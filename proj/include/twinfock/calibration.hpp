#pragma once

// Landmark-based calibration of q/|omega| against microwave dressing power.

#include "twinfock/dynamics.hpp"
#include "twinfock/spinor.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twinfock {

// q(P) = q_zeeman - kappa P - kappa2 P^2, P relative power in [0, 1].
struct DressingModel {
  double q_zeeman = 38.5;  // Hz
  double kappa = 0.0;      // Hz
  double kappa2 = 0.0;     // Hz

  double q(double power) const { return q_zeeman - kappa * power - kappa2 * power * power; }
  // Throws unless q is strictly decreasing on [0, 1].
  void validate() const;
  // Power in [0, 1] with q(P) = target; throws std::out_of_range.
  double power_for(double q_target) const;
  bool operator==(const DressingModel&) const = default;
};

enum class LandmarkKind { Plus2, Plus1, Zero, Minus1, Minus2 };

double landmark_value(LandmarkKind kind);  // nominal q/|omega|
std::string to_string(LandmarkKind kind);
LandmarkKind landmark_from_value(int value);  // +2 .. -2

enum class Recipe { PolarStart, RotatedStart, TwinFockStart };

struct LandmarkProtocol {
  LandmarkKind kind = LandmarkKind::Plus2;
  Recipe recipe = Recipe::PolarStart;
  double duration = 0.09;  // s
  // Onset level for the +-2 threshold; unset means the linearized seed level.
  std::optional<double> threshold;
};

// Default durations: 90 ms for +-2, 110 ms for +-1, 60 ms for 0.
LandmarkProtocol default_protocol(LandmarkKind kind);

// Transfer level reached by linearized pair creation from the recipe's
// initial state at the critical point, used as the default onset floor.
double seed_threshold(const LandmarkProtocol& protocol, const ModelParams& params);

struct CalibrationPoint {
  LandmarkKind landmark = LandmarkKind::Plus2;
  double power = 0.0;
  Recipe recipe = Recipe::PolarStart;
};

struct LandmarkCurve {
  LandmarkProtocol protocol;
  std::vector<double> power;
  std::vector<double> q_over_omega;
  std::vector<double> transfer;  // pf for polar starts, 1 - pf for twin-Fock starts
  std::vector<double> pair_fraction;
  double initial_pair_fraction = 0.0;
  double criterion_level = 0.0;  // threshold or reference level used
  double located_power = 0.0;
  double located_q_over_omega = 0.0;
};

class LandmarkOutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SpinorState recipe_state(Recipe recipe, const PairBasis& basis);

// Evolves the recipe state at fixed q(P) for every power and locates the
// landmark. params.q is ignored. Throws LandmarkOutOfRange.
LandmarkCurve simulate_landmark(const LandmarkProtocol& protocol, const ModelParams& params,
                                const DressingModel& dressing, std::span<const double> power_grid,
                                int workers = 1, const KrylovOptions& krylov = {});

struct FitOptions {
  bool quadratic = false;
  std::optional<double> fixed_q_zeeman;
};

struct DressingFit {
  DressingModel model;
  std::vector<double> residuals;  // Hz, q_model(P) - landmark |omega|
  double rms_residual = 0.0;
};

DressingFit fit_dressing_model(std::span<const CalibrationPoint> points, double omega,
                               const FitOptions& options = {});

// Linear ramp of the dressing power mapped through q(P), sampled as
// `pieces` linear segments in q.
RampSchedule power_ramp_schedule(const DressingModel& dressing, double p_start, double p_end,
                                 double duration, int pieces = 200);

}  // namespace twinfock
