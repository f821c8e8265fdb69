#pragma once

// Experiment configuration in a flat `key = value` format with [section]
// headers. Unknown sections and keys are rejected; `auto` marks values
// that the protocol derives from an upstream stage.

#include "twinfock/constants.hpp"
#include "twinfock/csv.hpp"
#include "twinfock/dynamics.hpp"
#include "twinfock/kinematics.hpp"
#include "twinfock/measurement.hpp"
#include "twinfock/raman.hpp"
#include "twinfock/spinor.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace twinfock {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
  std::string preset = "fig_s1c_default";  // or "custom"
  std::vector<RampSegment> segments;       // used when preset == "custom"
  double time_scale = 1.0;

  RampSchedule resolve(double omega) const;
  bool operator==(const ScheduleConfig&) const = default;
};

struct NoiseConfig {
  std::optional<double> sigma_mode = 37.0;  // nullopt: from the detection model
  double contrast = 0.69;
  std::optional<double> sigma_leftover;  // nullopt: equal to sigma_mode
  bool operator==(const NoiseConfig&) const = default;
};

struct SamplingConfig {
  std::uint64_t shots = 2000;
  double source_atoms = 1e4;
  std::optional<double> transfer_efficiency = 0.972;  // nullopt: from the Raman model
  double efficiency_jitter = 0.006;
  double atom_number_jitter = 0.1;
  bool operator==(const SamplingConfig&) const = default;
};

struct TrapSection {
  Vec3 frequencies{150.0, 160.0, 220.0};  // Hz
  double free_velocity = 1.8e-3;          // m/s, sets the initial size
  double flash_start = 1e-3;              // s after release
  double flash_duration = 350e-6;         // s; 0 disables the lens
  double probe_time = 16e-3;              // s, imaging time
  bool operator==(const TrapSection&) const = default;
};

struct DetectionSection {
  double pixel_scale = 5e-6;
  double coverage = 4.0;
  double n_atoms = 9300.0;
  bool ceil_pixels = false;
  // The per-pixel noise is fixed by the uncollimated cloud reaching
  // reference_db at reference_time.
  double reference_db = -0.2;
  double reference_time = 16e-3;
  bool operator==(const DetectionSection&) const = default;
};

struct PulseSection {
  PulseSpec spec;
  // When set, design_pi_pulse(design_width, edge_fraction) replaces spec.
  std::optional<double> design_width;
  double edge_fraction = 0.2;

  PulseSpec resolve() const;
  bool operator==(const PulseSection&) const = default;
};

struct CloudSection {
  std::optional<double> sigma_v = 0.4e-3;  // nullopt: collimated velocity
  double fall_time = 7.7e-3;               // s, sets the mean Doppler shift
  bool operator==(const CloudSection&) const = default;
};

struct RunSection {
  std::uint64_t seed = 1;
  int workers = 1;
  int bootstrap = 1000;
  double confidence = 0.95;
  bool operator==(const RunSection&) const = default;
};

struct ExperimentConfig {
  ModelParams model;
  ScheduleConfig schedule;
  StepControl step;
  NoiseConfig noise;
  SamplingConfig sampling;
  TrapSection trap;
  DetectionSection detection;
  PulseSection pulse;
  CloudSection cloud;
  BeamGeometry geometry;
  Constants constants;
  RunSection run;

  void validate() const;  // throws ConfigError
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// "paper_momentum" or "model_chain"; throws ConfigError.
ExperimentConfig preset_config(const std::string& name);

}  // namespace twinfock
