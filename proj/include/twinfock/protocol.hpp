#pragma once

// The two-cycle measurement protocol end to end: ramp into the twin-Fock
// phase, release and collimation (detection noise), Raman transfer
// (efficiency), J_z and J_perp sampling, and both squeezing reports.

#include "twinfock/config.hpp"

#include <string>
#include <vector>

namespace twinfock {

// Wraps any stage failure with the stage name.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string stage, const std::string& what, bool numerical)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), numerical_(numerical) {}
  const std::string& stage() const { return stage_; }
  bool numerical() const { return numerical_; }

 private:
  std::string stage_;
  bool numerical_;
};

struct SweepStage {
  double final_pair_fraction = 0.0;
  double final_ground_overlap = 0.0;
  double accepted_dt = 0.0;
};

struct KinematicsStage {
  double sigma0_ref = 0.0;           // m
  double free_velocity = 0.0;        // m/s, geometric mean
  double collimated_velocity = 0.0;  // m/s
  double probe_size = 0.0;           // m, at probe_time
  double per_pixel_noise = 0.0;      // atoms
  double detection_noise_db = 0.0;
  double derived_sigma_mode = 0.0;   // atoms
};

struct RamanStage {
  PulseSpec pulse;            // tuned to the falling cloud
  double mean_velocity = 0.0;
  double sigma_v = 0.0;
  double doppler_rms = 0.0;   // Hz
  double eta1 = 0.0;
  double eta2 = 0.0;
};

struct ProtocolResult {
  SweepStage sweep;
  KinematicsStage kinematics;
  RamanStage raman;
  NoiseModel noise;       // as used for sampling
  SamplingSpec sampling;  // as used for sampling
  std::vector<CountRecord> records_z;
  std::vector<CountRecord> records_perp;
  SqueezingReport unconditional;
  SqueezingReport conditional;
  double beta = 0.0;
  std::vector<std::string> warnings;
};

ProtocolResult run_protocol(const ExperimentConfig& config);

// Individual stages, shared with the scan subcommands.
SpinorState prepare_state(const ExperimentConfig& config, SweepStage* stage = nullptr);
KinematicsStage kinematics_stage(const ExperimentConfig& config);
RamanStage raman_stage(const ExperimentConfig& config, const KinematicsStage& kin);

// Key = value text of a report, in a fixed order.
std::string format_report(const SqueezingReport& report);

}  // namespace twinfock
