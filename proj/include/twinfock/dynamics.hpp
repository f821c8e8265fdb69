#pragma once

// Ground states, time evolution under a piecewise-linear q(t), and
// phase-diagram scans.

#include "twinfock/krylov.hpp"
#include "twinfock/spinor.hpp"

#include <span>
#include <string>
#include <vector>

namespace twinfock {

struct RampSegment {
  double duration = 0.0;  // s
  double q_start = 0.0;   // Hz
  double q_end = 0.0;     // Hz
  bool operator==(const RampSegment&) const = default;
};

class RampSchedule {
 public:
  RampSchedule() = default;
  explicit RampSchedule(std::vector<RampSegment> segments);

  // Four linear ramps: 13 -> 2.4 in 120 ms, 2.4 -> 1.6 in 350 ms,
  // 1.6 -> 0 in 275 ms, 0 -> -1.6 in 275 ms (units of |omega|); 1020 ms total.
  static RampSchedule fig_s1c_default(double omega);
  static RampSchedule constant(double q, double duration);
  static RampSchedule linear(double q_start, double q_end, double duration);
  // Looks up a shipped schedule by name; throws std::invalid_argument.
  static RampSchedule preset(const std::string& name, double omega);

  const std::vector<RampSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double total_duration() const;
  double q_at(double t) const;
  double q_start() const;
  double q_end() const;
  // Segment end times, starting with 0.
  std::vector<double> breakpoints() const;

  RampSchedule time_scaled(double factor) const;  // durations * factor
  RampSchedule reversed() const;

  bool operator==(const RampSchedule&) const = default;

 private:
  std::vector<RampSegment> segments_;
};

struct StepControl {
  double tolerance = 1e-4;       // allowed pair-fraction change under step halving
  double initial_dt = 2e-3;      // s, q(t) sampled at step midpoints
  int max_halvings = 10;
  double trace_interval = 5e-3;  // s
  bool ground_overlap = true;
  KrylovOptions krylov;
  bool operator==(const StepControl&) const = default;
};

struct GroundState {
  SpinorState state;
  double energy = 0.0;    // Hz
  double residual = 0.0;  // ||H v - E v||
};

struct EigenOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-9;  // relative to the spectral scale
};

// Lowest eigenpair by Sturm bisection followed by shifted inverse iteration.
GroundState ground_state(const TridiagonalOperator& op, const EigenOptions& options = {});

struct SweepResult {
  SpinorState final_state;
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> pair_fraction_trace;
  std::vector<double> ground_overlap_trace;  // empty if not requested
  ModelParams params;
  RampSchedule schedule;
  StepControl control;
  double accepted_dt = 0.0;
  int halvings = 0;
  double norm_deviation = 0.0;
};

// Integrates i dpsi/dt = 2 pi H(q(t)) psi. The step is halved until the
// pair-fraction trace moves by less than control.tolerance.
SweepResult evolve(const SpinorState& initial, const ModelParams& params,
                   const RampSchedule& schedule, const StepControl& control = {});

// Fixed-step run without the halving loop.
SweepResult evolve_fixed_step(const SpinorState& initial, const ModelParams& params,
                              const RampSchedule& schedule, const StepControl& control,
                              double dt);

// exp(-i 2 pi H duration) psi for a constant operator.
SpinorState evolve_constant(const SpinorState& initial, const TridiagonalOperator& op,
                            double duration, const KrylovOptions& options = {});

struct PhaseScan {
  int n_atoms = 0;
  double omega = 0.0;
  std::vector<double> q_over_omega;
  std::vector<double> pair_fraction;
  std::vector<double> slope;      // d pair_fraction / d(q/|omega|)
  std::vector<double> curvature;  // second derivative
  double upper_transition = 0.0;  // curvature maximum
  double lower_transition = 0.0;  // curvature minimum
  double upper_peak_width = 0.0;  // FWHM of the curvature peaks
  double lower_peak_width = 0.0;
};

// Ground-state pair fraction over a sorted grid of q values (Hz).
PhaseScan phase_scan(int n_atoms, double omega, std::span<const double> q_grid, int workers = 1);

struct OscillationProbe {
  std::vector<double> times;
  std::vector<double> pair_fraction;
  bool interior_maximum = false;
  double max_time = 0.0;
  double max_value = 0.0;
  double final_value = 0.0;
};

OscillationProbe oscillation_probe(const ModelParams& params, const RampSchedule& schedule,
                                   const StepControl& control = {});

// Index of a strict interior maximum that rises by more than `prominence`
// above both trace ends, or -1.
long find_interior_maximum(std::span<const double> values, double prominence);

}  // namespace twinfock
