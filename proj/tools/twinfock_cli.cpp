// twinfock: command-line front end for the simulation chain.
//
// Every subcommand writes plot-ready CSV files and a manifest.txt holding
// the exact configuration used into --out. Exit codes: 0 success,
// 2 configuration error, 3 numerical failure, 1 anything else.

#include "twinfock/calibration.hpp"
#include "twinfock/config.hpp"
#include "twinfock/csv.hpp"
#include "twinfock/kernels.hpp"
#include "twinfock/parallel.hpp"
#include "twinfock/protocol.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace twinfock;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = "out";
};

ExperimentConfig resolve_config(const Common& c) {
  if (!c.config_path.empty() && !c.preset.empty()) throw ConfigError("--config and --preset are exclusive");
  ExperimentConfig cfg = !c.config_path.empty() ? load_config(c.config_path)
                         : !c.preset.empty()    ? preset_config(c.preset)
                                                : ExperimentConfig{};
  if (c.seed) cfg.run.seed = *c.seed;
  if (c.workers) cfg.run.workers = *c.workers;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const Common& c) {
  fs::path out(c.out);
  fs::create_directories(out);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

// The manifest is the config file plus a [manifest] header block; strip
// the header and it parses back into the same configuration.
void write_manifest(const fs::path& out, const std::string& command, const ExperimentConfig& cfg,
                    const std::map<std::string, std::string>& extra = {}) {
  std::string text = "# [manifest]\n";
  text += "# command = " + command + "\n";
  text += "# version = " + std::string(kVersion) + "\n";
  text += "# compiler = " + std::string(__VERSION__) + "\n";
  text += "# kernels = " + std::string(kernels::backend_name(kernels::active_backend())) + "\n";
  for (const auto& [k, v] : extra) text += "# " + k + " = " + v + "\n";
  text += "\n" + serialize_config(cfg);
  write_text(out / "manifest.txt", text);
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("grids need at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}

ordered_json report_json(const SqueezingReport& r) {
  auto ci = [](const Interval& i) { return ordered_json::array({i.lo, i.hi}); };
  return {{"n_shots_z", r.n_shots_z},
          {"n_shots_perp", r.n_shots_perp},
          {"excluded_z", r.excluded_z},
          {"excluded_perp", r.excluded_perp},
          {"mean_atoms", r.mean_atoms},
          {"variance_jz", r.variance_jz},
          {"jperp_second_moment", r.jperp_second_moment},
          {"number_squeezing_db", r.number_squeezing_db},
          {"number_squeezing_db_ci", ci(r.number_squeezing_db_ci)},
          {"xi2", r.xi2},
          {"xi2_ci", ci(r.xi2_ci)},
          {"xi2_db", r.xi2_db},
          {"xi2_db_ci", ci(r.xi2_db_ci)},
          {"xi2_floored", r.xi2_floored},
          {"jperp_fraction", r.jperp_fraction},
          {"jperp_fraction_ci", ci(r.jperp_fraction_ci)},
          {"entangled", r.entangled},
          {"bootstrap", r.bootstrap}};
}

void print_report(const char* label, const SqueezingReport& r) {
  std::cout << label << ": number squeezing " << r.number_squeezing_db << " dB, xi2 " << r.xi2_db << " dB ["
            << r.xi2_db_ci.lo << ", " << r.xi2_db_ci.hi << "], jperp_fraction " << r.jperp_fraction
            << (r.entangled ? ", entangled" : "") << "\n";
}

// --- subcommands ----------------------------------------------------------

struct SweepArgs {
  double scale = 1.0;
};

void cmd_sweep(const Common& c, const SweepArgs& a) {
  ExperimentConfig cfg = resolve_config(c);
  cfg.schedule.time_scale *= a.scale;
  cfg.validate();
  const auto out = prepare_out(c);
  const RampSchedule schedule = cfg.schedule.resolve(cfg.model.omega);
  const GroundState g = ground_state(build_hamiltonian(cfg.model.with_q(schedule.q_start())));
  const SweepResult r = evolve(g.state, cfg.model, schedule, cfg.step);
  Table t;
  t.add("t_s", r.times);
  t.add("q_hz", r.q);
  t.add("pair_fraction", r.pair_fraction_trace);
  if (!r.ground_overlap_trace.empty()) t.add("ground_overlap", r.ground_overlap_trace);
  write_table_file((out / "sweep.csv").string(), t);
  write_json(out / "summary.json", {{"final_pair_fraction", r.pair_fraction_trace.back()},
                                    {"final_ground_overlap", r.ground_overlap_trace.empty() ? 0.0 : r.ground_overlap_trace.back()},
                                    {"accepted_dt", r.accepted_dt},
                                    {"halvings", r.halvings},
                                    {"norm_deviation", r.norm_deviation}});
  write_manifest(out, "sweep", cfg, {{"scale", format_double(a.scale)}});
  std::cout << "final pair fraction " << r.pair_fraction_trace.back() << " (dt " << r.accepted_dt << " s)\n";
}

struct PhaseArgs {
  double q_min = -3.0, q_max = 3.0;  // units of |omega|
  int points = 241;
};

void cmd_phase_scan(const Common& c, const PhaseArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  std::vector<double> q = linspace(a.q_min * std::abs(cfg.model.omega), a.q_max * std::abs(cfg.model.omega), a.points);
  const PhaseScan s = phase_scan(cfg.model.n_atoms, cfg.model.omega, q, cfg.run.workers);
  Table t;
  t.add("q_over_omega", s.q_over_omega);
  t.add("q_hz", q);
  t.add("pair_fraction", s.pair_fraction);
  t.add("slope", s.slope);
  t.add("curvature", s.curvature);
  write_table_file((out / "phase_scan.csv").string(), t);
  write_json(out / "summary.json", {{"upper_transition", s.upper_transition},
                                    {"lower_transition", s.lower_transition},
                                    {"upper_peak_width", s.upper_peak_width},
                                    {"lower_peak_width", s.lower_peak_width}});
  write_manifest(out, "phase-scan", cfg);
  std::cout << "transitions at q/|Omega| = " << s.upper_transition << " and " << s.lower_transition << "\n";
}

struct CalibrateArgs {
  double q_zeeman = 38.5, kappa = 72.22, kappa2 = 0.0;
  double p_min = 0.40, p_max = 0.70;
  int points = 151;
  bool quadratic = false;
};

void cmd_calibrate(const Common& c, const CalibrateArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  DressingModel truth{a.q_zeeman, a.kappa, a.kappa2};
  truth.validate();
  const auto grid = linspace(a.p_min, a.p_max, a.points);
  std::vector<CalibrationPoint> points;
  ordered_json landmarks = ordered_json::array();
  for (LandmarkKind k : {LandmarkKind::Plus2, LandmarkKind::Plus1, LandmarkKind::Zero, LandmarkKind::Minus1,
                         LandmarkKind::Minus2}) {
    const LandmarkProtocol proto = default_protocol(k);
    const LandmarkCurve curve = simulate_landmark(proto, cfg.model, truth, grid, cfg.run.workers, cfg.step.krylov);
    Table t;
    t.add("power", curve.power);
    t.add("pair_fraction", curve.pair_fraction);
    t.add("q_over_omega", curve.q_over_omega);
    t.add("transfer", curve.transfer);
    write_table_file((out / ("landmark_" + to_string(k) + ".csv")).string(), t);
    points.push_back({k, curve.located_power, proto.recipe});
    landmarks.push_back({{"landmark", to_string(k)},
                         {"nominal", landmark_value(k)},
                         {"power", curve.located_power},
                         {"q_over_omega", curve.located_q_over_omega},
                         {"criterion_level", curve.criterion_level}});
    std::cout << to_string(k) << ": P = " << curve.located_power << ", q/|Omega| = " << curve.located_q_over_omega << "\n";
  }
  FitOptions fo;
  fo.quadratic = a.quadratic;
  const DressingFit fit = fit_dressing_model(points, cfg.model.omega, fo);
  write_json(out / "calibration.json", {{"truth", {{"q_zeeman", truth.q_zeeman}, {"kappa", truth.kappa}, {"kappa2", truth.kappa2}}},
                                        {"landmarks", landmarks},
                                        {"fit", {{"q_zeeman", fit.model.q_zeeman},
                                                 {"kappa", fit.model.kappa},
                                                 {"kappa2", fit.model.kappa2},
                                                 {"residuals_hz", fit.residuals},
                                                 {"rms_residual_hz", fit.rms_residual}}}});
  write_manifest(out, "calibrate", cfg,
                 {{"dressing", format_double(a.q_zeeman) + "," + format_double(a.kappa) + "," + format_double(a.kappa2)},
                  {"power_grid", format_double(a.p_min) + ".." + format_double(a.p_max) + " x " + std::to_string(a.points)}});
  std::cout << "fit: q(P) = " << fit.model.q_zeeman << " - " << fit.model.kappa << " P - " << fit.model.kappa2
            << " P^2 (rms " << fit.rms_residual << " Hz)\n";
}

struct CollimateArgs {
  double tau_max = 600e-6;
  int points = 61;
  double t_max = 0.1;
};

void cmd_collimate_scan(const Common& c, const CollimateArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  const TrapConfig trap{cfg.trap.frequencies, {}};
  const Cloud free{trap, initial_sizes(trap, calibrate_sigma0(trap, cfg.trap.free_velocity))};
  const auto taus = linspace(0.0, a.tau_max, a.points);
  const CollimationScan scan = collimation_scan(free, cfg.trap.flash_start, taus, cfg.trap.probe_time, cfg.run.workers);
  Table t;
  std::vector<double> tau_us, size_um;
  for (double x : scan.tau) tau_us.push_back(x * 1e6);
  for (double x : scan.size) size_um.push_back(x * 1e6);
  t.add("tau_us", tau_us);
  t.add("size_um", size_um);
  write_table_file((out / "collimation.csv").string(), t);

  const KinematicsStage kin = kinematics_stage(cfg);
  PixelModel pm;
  pm.pixel_scale = cfg.detection.pixel_scale;
  pm.coverage = cfg.detection.coverage;
  pm.n_atoms = cfg.detection.n_atoms;
  pm.ceil_pixels = cfg.detection.ceil_pixels;
  pm.per_pixel_noise = kin.per_pixel_noise;
  const Cloud lensed{trap.with_flash(cfg.trap.flash_start, cfg.trap.flash_duration), free.sigma0};
  const double t_after = cfg.trap.flash_start + cfg.trap.flash_duration;
  const std::vector<ExpansionSetting> settings{
      {"uncollimated", free.size_at(0.0), free.asymptotic_velocity()},
      {"collimated", lensed.size_at(t_after), lensed.asymptotic_velocity()}};
  const auto tg = linspace(0.0, a.t_max, 201);
  const auto curves = noise_extrapolation(settings, tg, pm);
  {
    std::ofstream n(out / "noise_extrapolation.csv", std::ios::binary);
    n << "t_ms,noise_db,setting\n";
    for (const auto& cv : curves)
      for (std::size_t i = 0; i < cv.t.size(); ++i)
        n << format_double(cv.t[i] * 1e3) << ',' << format_double(cv.noise_db[i]) << ',' << cv.name << '\n';
    if (!n) throw std::runtime_error("cannot write noise_extrapolation.csv");
  }
  ordered_json zero = ordered_json::object();
  for (const auto& cv : curves) zero[cv.name] = std::isfinite(cv.zero_db_time) ? ordered_json(cv.zero_db_time) : ordered_json("never");
  write_json(out / "summary.json", {{"interior_minimum", scan.interior_minimum},
                                    {"minimum_tau_s", scan.minimum_tau},
                                    {"minimum_size_m", scan.minimum_size},
                                    {"operating_tau_s", scan.operating_tau},
                                    {"operating_reduction", scan.operating_reduction},
                                    {"detection_noise_db", kin.detection_noise_db},
                                    {"zero_db_time_s", zero}});
  write_manifest(out, "collimate-scan", cfg);
  std::cout << "size minimum at tau = " << scan.minimum_tau * 1e6 << " us; operating tau " << scan.operating_tau * 1e6
            << " us, velocity reduction " << scan.operating_reduction * 100 << "%\n";
}

struct RamanArgs {
  double tau_min = 5e-6, tau_max = 100e-6;
  int points = 40;
};

void cmd_raman_scan(const Common& c, const RamanArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  const KinematicsStage kin = kinematics_stage(cfg);
  const RamanStage base = raman_stage(cfg, kin);
  const auto taus = linspace(a.tau_min, a.tau_max, a.points);
  std::vector<double> eta1(taus.size()), eta2(taus.size());
  VelocityCloud cloud;
  cloud.mean_velocity = base.mean_velocity;
  cloud.sigma_v = base.sigma_v;
  parallel_for(taus.size(), cfg.run.workers, [&](std::size_t i) {
    PulseSpec p = design_pi_pulse(1.0 / taus[i], cfg.pulse.edge_fraction);
    p.two_photon_detuning = base.pulse.two_photon_detuning;
    const DoublePulse d = double_pulse(p, p, cloud, cfg.geometry, cfg.constants);
    eta1[i] = d.eta1;
    eta2[i] = d.eta2;
  });
  Table t;
  t.add("tau_s", taus);
  t.add("eta1", eta1);
  t.add("eta2", eta2);
  write_table_file((out / "raman_scan.csv").string(), t);
  write_json(out / "summary.json", {{"sigma_v", base.sigma_v},
                                    {"doppler_rms_hz", base.doppler_rms},
                                    {"mean_velocity", base.mean_velocity},
                                    {"configured_pulse", {{"eta1", base.eta1}, {"eta2", base.eta2}}}});
  write_manifest(out, "raman-scan", cfg);
  std::cout << "configured pulse: eta1 " << base.eta1 << ", eta2 " << base.eta2 << "\n";
}

struct SpectroArgs {
  double span = 150e3;  // Hz either side of resonance
  int points = 301;
};

void cmd_spectroscopy(const Common& c, const SpectroArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  const KinematicsStage kin = kinematics_stage(cfg);
  const RamanStage base = raman_stage(cfg, kin);
  VelocityCloud cloud;
  cloud.mean_velocity = base.mean_velocity;
  cloud.sigma_v = base.sigma_v;
  const double centre = base.pulse.two_photon_detuning;
  const auto grid = linspace(centre - a.span, centre + a.span, a.points);
  const Spectrum s = spectroscopy(cfg.pulse.resolve(), cloud, cfg.geometry, grid, cfg.trap.free_velocity, base.sigma_v,
                                  cfg.constants, cfg.run.workers);
  Table t;
  t.add("delta_hz", s.detuning);
  t.add("efficiency", s.efficiency);
  write_table_file((out / "spectroscopy.csv").string(), t);
  Table o;
  o.add("delta_hz", s.detuning);
  o.add("doppler_free", s.overlay_free);
  o.add("doppler_collimated", s.overlay_collimated);
  write_table_file((out / "doppler_overlay.csv").string(), o);
  write_json(out / "summary.json", {{"peak_detuning_hz", s.peak_detuning},
                                    {"fwhm_hz", s.fwhm},
                                    {"fourier_width_hz", fourier_width(cfg.pulse.resolve())},
                                    {"overlay_sigma_free_hz", s.overlay_sigma_free},
                                    {"overlay_sigma_collimated_hz", s.overlay_sigma_collimated}});
  write_manifest(out, "spectroscopy", cfg);
  std::cout << "peak at " << s.peak_detuning << " Hz, FWHM " << s.fwhm << " Hz\n";
}

struct AnalyzeArgs {
  std::string csv;
  bool conditional = false;
};

void cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto records = read_records_file(a.csv);
  std::vector<CountRecord> z, p;
  for (const auto& r : records) (r.cycle == Cycle::Jz ? z : p).push_back(r);
  if (z.empty() || p.empty()) throw ConfigError("analyze needs both Jz and Jperp records");
  const auto out = prepare_out(c);
  ReportOptions opts{cfg.run.bootstrap, cfg.run.confidence, cfg.run.seed, cfg.run.workers};
  const SqueezingReport rep = squeezing_report(z, p, opts);
  ordered_json j{{"input", a.csv}, {"unconditional", report_json(rep)}};
  print_report("unconditional", rep);
  std::string text = "[unconditional]\n" + format_report(rep);
  if (a.conditional) {
    const ConditionalResult cond = conditional_correct(z);
    const SqueezingReport rc = squeezing_report(cond.records, p, opts);
    j["conditional"] = report_json(rc);
    j["beta"] = cond.beta;
    j["warnings"] = cond.warnings;
    text += "\n[conditional]\nbeta = " + format_double(cond.beta) + "\n" + format_report(rc);
    print_report("conditional", rc);
    for (const auto& w : cond.warnings) std::cerr << "warning: " << w << "\n";
  }
  write_text(out / "report.txt", text);
  write_json(out / "report.json", j);
  write_manifest(out, "analyze", cfg, {{"input", a.csv}});
}

void cmd_protocol(const Common& c) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto out = prepare_out(c);
  const ProtocolResult r = run_protocol(cfg);
  std::vector<CountRecord> all = r.records_z;
  all.insert(all.end(), r.records_perp.begin(), r.records_perp.end());
  write_records_file((out / "records.csv").string(), all);
  write_text(out / "report.txt", "[unconditional]\n" + format_report(r.unconditional) + "\n[conditional]\nbeta = " +
                                      format_double(r.beta) + "\n" + format_report(r.conditional));
  ordered_json stages{
      {"sweep", {{"final_pair_fraction", r.sweep.final_pair_fraction},
                 {"final_ground_overlap", r.sweep.final_ground_overlap},
                 {"accepted_dt", r.sweep.accepted_dt}}},
      {"kinematics", {{"sigma0_ref", r.kinematics.sigma0_ref},
                      {"free_velocity", r.kinematics.free_velocity},
                      {"collimated_velocity", r.kinematics.collimated_velocity},
                      {"probe_size", r.kinematics.probe_size},
                      {"per_pixel_noise", r.kinematics.per_pixel_noise},
                      {"detection_noise_db", r.kinematics.detection_noise_db},
                      {"derived_sigma_mode", r.kinematics.derived_sigma_mode}}},
      {"raman", {{"mean_velocity", r.raman.mean_velocity},
                 {"sigma_v", r.raman.sigma_v},
                 {"doppler_rms_hz", r.raman.doppler_rms},
                 {"two_photon_detuning_hz", r.raman.pulse.two_photon_detuning},
                 {"eta1", r.raman.eta1},
                 {"eta2", r.raman.eta2}}},
      {"sampling", {{"sigma_mode", r.noise.sigma_mode},
                    {"sigma_leftover", r.noise.leftover_sigma()},
                    {"contrast", r.noise.contrast},
                    {"transfer_efficiency", r.sampling.transfer_efficiency},
                    {"shots", r.sampling.shots}}}};
  write_json(out / "report.json", {{"stages", stages},
                                   {"unconditional", report_json(r.unconditional)},
                                   {"conditional", report_json(r.conditional)},
                                   {"beta", r.beta},
                                   {"warnings", r.warnings}});
  write_manifest(out, "protocol", cfg);
  print_report("unconditional", r.unconditional);
  print_report("conditional", r.conditional);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Config file (key = value with [sections])")->check(CLI::ExistingFile);
  sub->add_option("--preset", c.preset, "Shipped config preset: paper_momentum or model_chain");
  sub->add_option("--seed", c.seed, "Override run.seed");
  sub->add_option("--workers", c.workers, "Override run.workers")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-Fock state preparation, detection and momentum-mode simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default configuration and exit");

  Common common;
  SweepArgs sweep;
  PhaseArgs phase;
  CalibrateArgs cal;
  CollimateArgs col;
  RamanArgs ram;
  SpectroArgs spec;
  AnalyzeArgs ana;

  auto* s_sweep = app.add_subcommand("sweep", "Ramp q from the polar into the twin-Fock phase");
  add_common(s_sweep, common);
  s_sweep->add_option("--scale", sweep.scale, "Extra time-scale factor on the schedule")->check(CLI::PositiveNumber);

  auto* s_phase = app.add_subcommand("phase-scan", "Ground-state pair fraction versus q");
  add_common(s_phase, common);
  s_phase->add_option("--q-min", phase.q_min, "Lower q/|Omega|")->capture_default_str();
  s_phase->add_option("--q-max", phase.q_max, "Upper q/|Omega|")->capture_default_str();
  s_phase->add_option("--points", phase.points, "Grid points")->capture_default_str();

  auto* s_cal = app.add_subcommand("calibrate", "Simulate the five landmarks on a synthetic dressing model and fit it");
  add_common(s_cal, common);
  s_cal->add_option("--q-zeeman", cal.q_zeeman, "Undressed q in Hz")->capture_default_str();
  s_cal->add_option("--kappa", cal.kappa, "Linear dressing coefficient in Hz")->capture_default_str();
  s_cal->add_option("--kappa2", cal.kappa2, "Quadratic dressing coefficient in Hz")->capture_default_str();
  s_cal->add_option("--p-min", cal.p_min, "Lowest relative power")->capture_default_str();
  s_cal->add_option("--p-max", cal.p_max, "Highest relative power")->capture_default_str();
  s_cal->add_option("--points", cal.points, "Power grid points")->capture_default_str();
  s_cal->add_flag("--quadratic", cal.quadratic, "Fit the quadratic dressing model");

  auto* s_col = app.add_subcommand("collimate-scan", "Cloud size versus lens duration and detection-noise extrapolation");
  add_common(s_col, common);
  s_col->add_option("--tau-max", col.tau_max, "Longest flash in s")->capture_default_str();
  s_col->add_option("--points", col.points, "Flash grid points")->capture_default_str();
  s_col->add_option("--t-max", col.t_max, "Extrapolation horizon in s")->capture_default_str();

  auto* s_ram = app.add_subcommand("raman-scan", "Double-pulse efficiencies versus pulse duration");
  add_common(s_ram, common);
  s_ram->add_option("--tau-min", ram.tau_min, "Shortest pulse in s")->capture_default_str();
  s_ram->add_option("--tau-max", ram.tau_max, "Longest pulse in s")->capture_default_str();
  s_ram->add_option("--points", ram.points, "Grid points")->capture_default_str();

  auto* s_spec = app.add_subcommand("spectroscopy", "Transfer versus two-photon detuning with Doppler overlays");
  add_common(s_spec, common);
  s_spec->add_option("--span", spec.span, "Half width of the detuning scan in Hz")->capture_default_str();
  s_spec->add_option("--points", spec.points, "Grid points")->capture_default_str();

  auto* s_ana = app.add_subcommand("analyze", "Squeezing report for an external count-record CSV");
  add_common(s_ana, common);
  s_ana->add_option("csv", ana.csv, "Records with header shot,cycle,n_a,n_b,n_leftover")->required()->check(CLI::ExistingFile);
  s_ana->add_flag("--conditional", ana.conditional, "Also report the leftover-conditioned result");

  auto* s_proto = app.add_subcommand("protocol", "Run the full two-cycle protocol");
  add_common(s_proto, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (print_config) {
      std::cout << serialize_config(ExperimentConfig{});
      return 0;
    }
    if (s_sweep->parsed()) cmd_sweep(common, sweep);
    else if (s_phase->parsed()) cmd_phase_scan(common, phase);
    else if (s_cal->parsed()) cmd_calibrate(common, cal);
    else if (s_col->parsed()) cmd_collimate_scan(common, col);
    else if (s_ram->parsed()) cmd_raman_scan(common, ram);
    else if (s_spec->parsed()) cmd_spectroscopy(common, spec);
    else if (s_ana->parsed()) cmd_analyze(common, ana);
    else if (s_proto->parsed()) cmd_protocol(common);
    else {
      std::cerr << app.help();
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error in " << e.what() << "\n";
    return e.numerical() ? 3 : 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const LandmarkOutOfRange& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
