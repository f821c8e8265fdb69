#pragma once

// Mean-field expansion after release (scaling ansatz), the trap re-flash
// used as a matter-wave lens, and the pixel-count detection noise model.

#include "twinfock/constants.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace twinfock {

using Vec3 = std::array<double, 3>;

double geometric_mean(const Vec3& v);

struct Flash {
  double t_start = 0.0;  // s after release
  double t_end = 0.0;
  bool operator==(const Flash&) const = default;
};

struct TrapConfig {
  Vec3 frequencies{150.0, 160.0, 220.0};  // Hz (not angular)
  std::vector<Flash> flashes;              // trap back on at full strength

  void validate() const;
  TrapConfig with_flash(double t_start, double duration) const;
  bool operator==(const TrapConfig&) const = default;
};

struct ExpansionState {
  double t = 0.0;
  Vec3 lambda{1.0, 1.0, 1.0};
  Vec3 lambda_dot{0.0, 0.0, 0.0};  // 1/s
};

struct OdeTolerances {
  double absolute = 1e-12;
  double relative = 1e-11;
};

// Integrates lambda_j'' = w_j^2 / (lambda_j lambda_x lambda_y lambda_z)
// - f(t) w_j^2 lambda_j from lambda = 1 at release (t = 0); f = 1 during
// flashes. The grid must be sorted and non-negative.
std::vector<ExpansionState> scaling_expansion(const TrapConfig& trap, std::span<const double> t_grid,
                                              const OdeTolerances& tol = {});
ExpansionState expansion_at(const TrapConfig& trap, double t, const OdeTolerances& tol = {});

// Per-axis initial rms sizes for a reference size; sizes scale as 1/w_j.
Vec3 initial_sizes(const TrapConfig& trap, double sigma0_ref);

// sigma0_ref giving the target geometric-mean asymptotic rms velocity
// after a free release. The scaling equations do not depend on sigma0, so
// this is a single division.
double calibrate_sigma0(const TrapConfig& trap, double target_velocity);

// Asymptotic dlambda/dt per axis, evaluated at `horizon` seconds.
Vec3 asymptotic_rates(const TrapConfig& trap, double horizon = 1.0);

struct Cloud {
  TrapConfig trap;
  Vec3 sigma0{};  // m

  double size_at(double t) const;  // geometric-mean rms size, m
  Vec3 velocity_at(double t) const;
  double asymptotic_velocity(double horizon = 1.0) const;  // geometric mean, m/s
};

struct CollimationScan {
  std::vector<double> tau;      // s
  std::vector<double> size;     // m, at probe_time
  double probe_time = 0.0;
  double flash_start = 0.0;
  bool interior_minimum = false;
  double minimum_tau = 0.0;     // parabolic refinement of the size minimum
  double minimum_size = 0.0;
  // Largest grid tau below the minimum where the size still falls at least
  // `lens_slope_fraction` as fast as at tau = 0 (linear lens regime).
  double operating_tau = 0.0;
  double operating_reduction = 0.0;  // 1 - v_post / v_free (geometric means)
};

CollimationScan collimation_scan(const Cloud& free_cloud, double flash_start,
                                 std::span<const double> tau_grid, double probe_time,
                                 int workers = 1, double lens_slope_fraction = 0.5);

// Flash duration at which the asymptotic geometric-mean velocity drops by
// `reduction`, by bisection on [0, tau_max].
double tau_for_reduction(const Cloud& free_cloud, double flash_start, double reduction,
                         double tau_max);

struct PixelModel {
  double pixel_scale = 5e-6;     // m per pixel
  double coverage = 4.0;         // image region width in units of the rms size
  double per_pixel_noise = 1.0;  // atoms rms per pixel
  double n_atoms = 9300.0;
  bool ceil_pixels = false;      // integer pixel count (not strictly monotone)

  double pixels(double size) const;
  // 10 log10(4 var_Jz / N) with var_Jz = 2 var_mode / 4.
  double noise_db(double size) const;
  // Size at which the noise reaches 0 dB (continuous pixel count).
  double zero_db_size() const;
};

double detection_noise_model(double cloud_size, const PixelModel& model);

// per_pixel_noise giving `target_db` at `size`.
PixelModel calibrate_per_pixel_noise(PixelModel model, double size, double target_db);

struct ExpansionSetting {
  std::string name;
  double size0 = 0.0;     // m
  double velocity = 0.0;  // m/s
};

struct NoiseCurve {
  std::string name;
  std::vector<double> t;         // s
  std::vector<double> size;      // m
  std::vector<double> noise_db;
  double zero_db_time = 0.0;     // s; infinity if never reached
};

// size(t) = sqrt(size0^2 + v^2 t^2) mapped through the pixel model.
std::vector<NoiseCurve> noise_extrapolation(std::span<const ExpansionSetting> settings,
                                            std::span<const double> t_grid, const PixelModel& model);

struct Temperatures {
  double full = 0.0;  // m sigma_v^2 / k_B
  double half = 0.0;  // m sigma_v^2 / (2 k_B)
};

Temperatures effective_temperatures(double sigma_v, const Constants& c = {});

}  // namespace twinfock
