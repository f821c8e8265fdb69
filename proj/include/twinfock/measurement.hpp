#pragma once

// Simulated count records for the J_z and J_perp cycles, conditional
// correction with the leftover mode, and the squeezing report.

#include "twinfock/spinor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twinfock {

enum class Cycle { Jz, Jperp };

std::string to_string(Cycle c);
Cycle cycle_from_string(const std::string& s);

// Detected counts are real-valued; noise can make them negative.
struct CountRecord {
  std::uint64_t shot = 0;
  Cycle cycle = Cycle::Jz;
  double n_a = 0.0;
  double n_b = 0.0;
  double n_leftover = 0.0;
  bool operator==(const CountRecord&) const = default;
};

struct NoiseModel {
  double sigma_mode = 0.0;  // atoms, Gaussian per detected mode
  double contrast = 1.0;    // weight of the coherent J_perp outcome
  // Noise on the leftover count; defaults to sigma_mode.
  std::optional<double> sigma_leftover;

  void validate() const;
  double leftover_sigma() const { return sigma_leftover.value_or(sigma_mode); }
  bool operator==(const NoiseModel&) const = default;
};

struct SamplingSpec {
  std::uint64_t shots = 1000;
  std::uint64_t seed = 1;
  double transfer_efficiency = 1.0;  // mode-B transfer probability
  double efficiency_jitter = 0.0;    // per-shot std of the efficiency
  double atom_number_jitter = 0.0;   // relative std of total N (log-normal)
  // Mean total N per shot; 0 keeps the state's N. Pair numbers are
  // rescaled from the state's distribution.
  double source_atoms = 0.0;
  int workers = 1;

  void validate() const;
  bool operator==(const SamplingSpec&) const = default;
};

std::vector<CountRecord> sample_jz(const SpinorState& state, const SamplingSpec& spec,
                                   const NoiseModel& noise);

std::vector<CountRecord> sample_jperp(const SpinorState& state, const SamplingSpec& spec,
                                      const NoiseModel& noise);

// Coherent spin state with N atoms split evenly between A and B: binomial
// counts for J_z, random-phase equatorial state rotated by pi/2 for J_perp.
std::vector<CountRecord> css_reference(int n_atoms, Cycle cycle, const SamplingSpec& spec,
                                       const NoiseModel& noise);

struct ConditionalResult {
  std::vector<CountRecord> records;  // n_b += beta * n_leftover, n_leftover = 0
  double beta = 0.0;
  double variance_before = 0.0;  // Var(J_z)
  double variance_after = 0.0;   // Var(J_z,cond)
  std::vector<std::string> warnings;
};

ConditionalResult conditional_correct(std::span<const CountRecord> records);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ReportOptions {
  int bootstrap = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SqueezingReport {
  std::uint64_t n_shots_z = 0;
  std::uint64_t n_shots_perp = 0;
  std::uint64_t excluded_z = 0;  // shots with N <= 1
  std::uint64_t excluded_perp = 0;
  double mean_atoms = 0.0;       // <N> of the J_z cycle
  double variance_jz = 0.0;      // (Delta J_z)^2
  double jperp_second_moment = 0.0;
  double number_squeezing = 0.0;  // 4 (Delta J_z)^2 / <N>
  double number_squeezing_db = 0.0;
  double xi2 = 0.0;
  double xi2_db = 0.0;
  double jperp_fraction = 0.0;  // <J_perp^2> / (N (N + 2) / 8)
  Interval number_squeezing_db_ci;
  Interval xi2_ci;
  Interval xi2_db_ci;
  Interval jperp_fraction_ci;
  bool xi2_floored = false;  // xi2_db clipped at the -30 dB floor
  bool entangled = false;    // upper CI bound of xi2 below 1
  int bootstrap = 0;
};

constexpr double kDbFloor = -30.0;
// 10 log10(x) floored at kDbFloor; sets *floored when clipped.
double to_db(double x, bool* floored = nullptr);

// Point estimates without resampling.
SqueezingReport squeezing_point(std::span<const CountRecord> records_z,
                                std::span<const CountRecord> records_perp);

SqueezingReport squeezing_report(std::span<const CountRecord> records_z,
                                 std::span<const CountRecord> records_perp,
                                 const ReportOptions& options = {});

}  // namespace twinfock
