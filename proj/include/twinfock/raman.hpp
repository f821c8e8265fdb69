#pragma once

// Two-photon Raman transfer as a driven two-level system: sin^2-edged
// pulses, Doppler detuning, velocity-ensemble averages, spectroscopy and
// the two-pulse sequence.

#include "twinfock/constants.hpp"
#include "twinfock/kinematics.hpp"

#include <span>
#include <vector>

namespace twinfock {

struct PulseSpec {
  double peak_rabi = 31.25e3;        // Hz, pulse area pi for the default shape
  double duration = 20e-6;           // s
  double edge_time = 4e-6;           // s, sin^2 rise and fall
  double two_photon_detuning = 0.0;  // Hz, excluding Doppler

  void validate() const;
  double envelope(double t) const;  // in [0, 1]
  bool operator==(const PulseSpec&) const = default;
};

struct VelocityCloud {
  double mean_velocity = 0.0;  // m/s along the beam axis
  double sigma_v = 0.4e-3;     // m/s rms
  // Optional discrete distribution; overrides the Gaussian when non-empty.
  std::vector<double> velocities;
  std::vector<double> weights;

  void validate() const;
  bool discrete() const { return !velocities.empty(); }
};

struct BeamGeometry {
  double wavelength_1 = 780.241e-9;  // m
  double wavelength_2 = 780.241e-9;  // m (counter-propagating)
  double intensity_ratio = 0.93;     // I2 / I1
  double calibrated_ratio = 0.93;    // ratio with zero differential light shift
  double ac_stark_slope = 0.0;       // Hz per unit fractional ratio deviation

  void validate() const;
  double k_eff() const;          // rad/m
  double ac_stark_shift() const;  // Hz
  bool operator==(const BeamGeometry&) const = default;
};

struct RecoilKinematics {
  double k_eff = 0.0;                // rad/m
  double recoil_velocity_2hk = 0.0;  // m/s
  double doppler_shift(double v) const;  // Hz
  Temperatures effective_temperature(double sigma_v, const Constants& c = {}) const;
};

RecoilKinematics recoil_kinematics(const BeamGeometry& geometry, const Constants& c = {});

struct PulseOptions {
  int edge_steps = 400;  // Magnus steps per sin^2 edge
};

// Excited-state population after the pulse for a constant total detuning.
double pulse_transfer(const PulseSpec& pulse, double detuning_total, const PulseOptions& opts = {});

// Generalized Rabi formula for a rectangular pulse.
double rabi_formula(double rabi, double detuning, double time);

// Fourier width W = 1 / duration; edges take `edge_fraction` of the pulse
// and the amplitude is set for pulse area pi.
PulseSpec design_pi_pulse(double target_fourier_width, double edge_fraction = 0.2);
double fourier_width(const PulseSpec& pulse);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 against the standard normal
};

// Gauss-Hermite rule for a standard normal variable (Golub-Welsch).
QuadratureRule gauss_hermite(int n);

struct EnsembleOptions {
  int initial_nodes = 24;
  int max_nodes = 384;
  double relative_tolerance = 1e-6;
  PulseOptions pulse;
};

struct EnsembleResult {
  double efficiency = 0.0;
  VelocityCloud surviving;    // (1 - P(v)) f(v), untransferred remnant
  VelocityCloud transferred;  // P(v) f(v)
  int nodes = 0;
};

EnsembleResult ensemble_efficiency(const PulseSpec& pulse, const VelocityCloud& cloud,
                                   const BeamGeometry& geometry, const Constants& c = {},
                                   const EnsembleOptions& opts = {});

struct Spectrum {
  std::vector<double> detuning;    // Hz, two-photon detuning delta_0
  std::vector<double> efficiency;
  double peak_detuning = 0.0;
  double fwhm = 0.0;               // Hz
  // Doppler-distribution overlays (peak-normalized) for the free and
  // collimated velocity spreads, centred on the resonant delta_0.
  double overlay_sigma_free = 0.0;        // Hz rms
  double overlay_sigma_collimated = 0.0;  // Hz rms
  std::vector<double> overlay_free;
  std::vector<double> overlay_collimated;
};

Spectrum spectroscopy(const PulseSpec& pulse, const VelocityCloud& cloud, const BeamGeometry& geometry,
                      std::span<const double> delta_grid, double sigma_free = 1.8e-3,
                      double sigma_collimated = 0.4e-3, const Constants& c = {}, int workers = 1,
                      const EnsembleOptions& opts = {});

struct DoublePulse {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

// eta2 is the second pulse's efficiency on the atoms the first one moved.
DoublePulse double_pulse(const PulseSpec& pulse1, const PulseSpec& pulse2, const VelocityCloud& cloud,
                         const BeamGeometry& geometry, const Constants& c = {},
                         const EnsembleOptions& opts = {});

// Velocity after `fall_time` of free fall from rest.
double fall_velocity(double fall_time, const Constants& c = {});
// Separation of the two momentum modes after `time` at the 2 hbar k recoil.
double mode_separation(double time, const BeamGeometry& geometry, const Constants& c = {});

}  // namespace twinfock
