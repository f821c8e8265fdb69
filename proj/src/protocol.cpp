#include "twinfock/protocol.hpp"

#include <cmath>
#include <sstream>

namespace twinfock {

namespace {

template <class F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ProtocolError&) {
    throw;
  } catch (const NumericalError& e) {
    throw ProtocolError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw ProtocolError(stage, e.what(), false);
  }
}

}  // namespace

SpinorState prepare_state(const ExperimentConfig& config, SweepStage* stage) {
  return staged("sweep", [&] {
    const RampSchedule schedule = config.schedule.resolve(config.model.omega);
    const ModelParams start = config.model.with_q(schedule.q_start());
    const GroundState g = ground_state(build_hamiltonian(start));
    const SweepResult r = evolve(g.state, config.model, schedule, config.step);
    if (stage) {
      stage->final_pair_fraction = r.pair_fraction_trace.back();
      stage->final_ground_overlap = r.ground_overlap_trace.empty() ? 0.0 : r.ground_overlap_trace.back();
      stage->accepted_dt = r.accepted_dt;
    }
    return r.final_state;
  });
}

KinematicsStage kinematics_stage(const ExperimentConfig& config) {
  return staged("kinematics", [&] {
    const auto& t = config.trap;
    KinematicsStage k;
    const TrapConfig free_trap{t.frequencies, {}};
    k.sigma0_ref = calibrate_sigma0(free_trap, t.free_velocity);
    const Cloud free{free_trap, initial_sizes(free_trap, k.sigma0_ref)};
    const Cloud lensed{t.flash_duration > 0.0 ? free_trap.with_flash(t.flash_start, t.flash_duration) : free_trap,
                       free.sigma0};
    k.free_velocity = free.asymptotic_velocity();
    k.collimated_velocity = lensed.asymptotic_velocity();
    k.probe_size = lensed.size_at(t.probe_time);

    PixelModel pm;
    pm.pixel_scale = config.detection.pixel_scale;
    pm.coverage = config.detection.coverage;
    pm.n_atoms = config.detection.n_atoms;
    pm.ceil_pixels = config.detection.ceil_pixels;
    pm = calibrate_per_pixel_noise(pm, free.size_at(config.detection.reference_time), config.detection.reference_db);
    k.per_pixel_noise = pm.per_pixel_noise;
    k.detection_noise_db = pm.noise_db(k.probe_size);
    // noise_db = 10 log10(2 var_mode / N).
    k.derived_sigma_mode = std::sqrt(std::pow(10.0, k.detection_noise_db / 10.0) * pm.n_atoms / 2.0);
    return k;
  });
}

RamanStage raman_stage(const ExperimentConfig& config, const KinematicsStage& kin) {
  return staged("raman", [&] {
    RamanStage r;
    const Constants& c = config.constants;
    const RecoilKinematics rk = recoil_kinematics(config.geometry, c);
    r.mean_velocity = fall_velocity(config.cloud.fall_time, c);
    r.sigma_v = config.cloud.sigma_v.value_or(kin.collimated_velocity);
    r.doppler_rms = rk.doppler_shift(r.sigma_v);
    r.pulse = config.pulse.resolve();
    // The laser detuning is set to the falling cloud's resonance.
    r.pulse.two_photon_detuning += -rk.doppler_shift(r.mean_velocity) - config.geometry.ac_stark_shift();
    VelocityCloud cloud;
    cloud.mean_velocity = r.mean_velocity;
    cloud.sigma_v = r.sigma_v;
    const DoublePulse d = double_pulse(r.pulse, r.pulse, cloud, config.geometry, c);
    r.eta1 = d.eta1;
    r.eta2 = d.eta2;
    return r;
  });
}

ProtocolResult run_protocol(const ExperimentConfig& config) {
  staged("config", [&] {
    config.validate();
    return 0;
  });
  ProtocolResult out;
  const SpinorState state = prepare_state(config, &out.sweep);
  out.kinematics = kinematics_stage(config);
  out.raman = raman_stage(config, out.kinematics);

  out.noise.sigma_mode = config.noise.sigma_mode.value_or(out.kinematics.derived_sigma_mode);
  out.noise.contrast = config.noise.contrast;
  out.noise.sigma_leftover = config.noise.sigma_leftover;
  out.sampling.shots = config.sampling.shots;
  out.sampling.seed = config.run.seed;
  out.sampling.transfer_efficiency = config.sampling.transfer_efficiency.value_or(out.raman.eta1);
  out.sampling.efficiency_jitter = config.sampling.efficiency_jitter;
  out.sampling.atom_number_jitter = config.sampling.atom_number_jitter;
  out.sampling.source_atoms = config.sampling.source_atoms;
  out.sampling.workers = config.run.workers;

  staged("sampling", [&] {
    out.records_z = sample_jz(state, out.sampling, out.noise);
    out.records_perp = sample_jperp(state, out.sampling, out.noise);
    return 0;
  });
  staged("report", [&] {
    ReportOptions opts;
    opts.bootstrap = config.run.bootstrap;
    opts.confidence = config.run.confidence;
    opts.seed = config.run.seed;
    opts.workers = config.run.workers;
    out.unconditional = squeezing_report(out.records_z, out.records_perp, opts);
    const ConditionalResult cond = conditional_correct(out.records_z);
    out.beta = cond.beta;
    out.warnings = cond.warnings;
    out.conditional = squeezing_report(cond.records, out.records_perp, opts);
    return 0;
  });
  return out;
}

std::string format_report(const SqueezingReport& r) {
  std::ostringstream s;
  auto kv = [&](const char* k, double v) { s << k << " = " << format_double(v) << '\n'; };
  auto ci = [&](const char* k, const Interval& i) {
    s << k << " = " << format_double(i.lo) << ", " << format_double(i.hi) << '\n';
  };
  s << "n_shots_z = " << r.n_shots_z << '\n' << "n_shots_perp = " << r.n_shots_perp << '\n';
  s << "excluded_z = " << r.excluded_z << '\n' << "excluded_perp = " << r.excluded_perp << '\n';
  kv("mean_atoms", r.mean_atoms);
  kv("variance_jz", r.variance_jz);
  kv("jperp_second_moment", r.jperp_second_moment);
  kv("number_squeezing", r.number_squeezing);
  kv("number_squeezing_db", r.number_squeezing_db);
  ci("number_squeezing_db_ci", r.number_squeezing_db_ci);
  kv("xi2", r.xi2);
  ci("xi2_ci", r.xi2_ci);
  kv("xi2_db", r.xi2_db);
  ci("xi2_db_ci", r.xi2_db_ci);
  s << "xi2_floored = " << (r.xi2_floored ? "true" : "false") << '\n';
  kv("jperp_fraction", r.jperp_fraction);
  ci("jperp_fraction_ci", r.jperp_fraction_ci);
  s << "entangled = " << (r.entangled ? "true" : "false") << '\n';
  s << "bootstrap = " << r.bootstrap << '\n';
  return s.str();
}

}  // namespace twinfock
