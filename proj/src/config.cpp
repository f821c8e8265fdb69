#include "twinfock/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace twinfock {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double parse_double(const std::string& v) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("expected a finite number, got '" + v + "'");
  return x;
}

template <class Int>
Int parse_int(const std::string& v) {
  Int x{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_opt(const std::optional<double>& x) { return x ? format_double(*x) : "auto"; }
std::optional<double> parse_opt(const std::string& v) {
  if (v == "auto") return std::nullopt;
  return parse_double(v);
}

std::string fmt_vec3(const Vec3& v) {
  return format_double(v[0]) + ", " + format_double(v[1]) + ", " + format_double(v[2]);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

Vec3 parse_vec3(const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 3) throw ConfigError("expected three comma-separated numbers, got '" + v + "'");
  return {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
}

// Segments as "duration:q_start:q_end" separated by ';' (s, Hz, Hz).
std::string fmt_segments(const std::vector<RampSegment>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += "; ";
    out += format_double(segs[i].duration) + ":" + format_double(segs[i].q_start) + ":" + format_double(segs[i].q_end);
  }
  return out;
}

std::vector<RampSegment> parse_segments(const std::string& v) {
  std::vector<RampSegment> segs;
  if (v.empty()) return segs;
  for (const auto& item : split(v, ';')) {
    const auto f = split(item, ':');
    if (f.size() != 3) throw ConfigError("ramp segment must be duration:q_start:q_end, got '" + item + "'");
    segs.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  return segs;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

void dbl(std::vector<Field>& f, const char* sec, const char* key, double& x) {
  f.push_back({sec, key, [&x] { return format_double(x); }, [&x](const std::string& v) { x = parse_double(v); }});
}
void opt(std::vector<Field>& f, const char* sec, const char* key, std::optional<double>& x) {
  f.push_back({sec, key, [&x] { return fmt_opt(x); }, [&x](const std::string& v) { x = parse_opt(v); }});
}
template <class Int>
void integer(std::vector<Field>& f, const char* sec, const char* key, Int& x) {
  f.push_back({sec, key, [&x] { return std::to_string(x); }, [&x](const std::string& v) { x = parse_int<Int>(v); }});
}
void flag(std::vector<Field>& f, const char* sec, const char* key, bool& x) {
  f.push_back({sec, key, [&x] { return fmt_bool(x); }, [&x](const std::string& v) { x = parse_bool(v); }});
}

std::vector<Field> fields(ExperimentConfig& c) {
  std::vector<Field> f;
  integer(f, "model", "n_atoms", c.model.n_atoms);
  dbl(f, "model", "omega", c.model.omega);
  dbl(f, "model", "q", c.model.q);

  f.push_back({"schedule", "preset", [&c] { return c.schedule.preset; },
               [&c](const std::string& v) { c.schedule.preset = v; }});
  f.push_back({"schedule", "segments", [&c] { return fmt_segments(c.schedule.segments); },
               [&c](const std::string& v) { c.schedule.segments = parse_segments(v); }});
  dbl(f, "schedule", "time_scale", c.schedule.time_scale);

  dbl(f, "step", "tolerance", c.step.tolerance);
  dbl(f, "step", "initial_dt", c.step.initial_dt);
  integer(f, "step", "max_halvings", c.step.max_halvings);
  dbl(f, "step", "trace_interval", c.step.trace_interval);
  flag(f, "step", "ground_overlap", c.step.ground_overlap);
  dbl(f, "step", "krylov_tolerance", c.step.krylov.tolerance);
  integer(f, "step", "krylov_max_dimension", c.step.krylov.max_dimension);
  dbl(f, "step", "krylov_max_phase", c.step.krylov.max_phase);

  opt(f, "noise", "sigma_mode", c.noise.sigma_mode);
  dbl(f, "noise", "contrast", c.noise.contrast);
  opt(f, "noise", "sigma_leftover", c.noise.sigma_leftover);

  integer(f, "sampling", "shots", c.sampling.shots);
  dbl(f, "sampling", "source_atoms", c.sampling.source_atoms);
  opt(f, "sampling", "transfer_efficiency", c.sampling.transfer_efficiency);
  dbl(f, "sampling", "efficiency_jitter", c.sampling.efficiency_jitter);
  dbl(f, "sampling", "atom_number_jitter", c.sampling.atom_number_jitter);

  f.push_back({"trap", "frequencies", [&c] { return fmt_vec3(c.trap.frequencies); },
               [&c](const std::string& v) { c.trap.frequencies = parse_vec3(v); }});
  dbl(f, "trap", "free_velocity", c.trap.free_velocity);
  dbl(f, "trap", "flash_start", c.trap.flash_start);
  dbl(f, "trap", "flash_duration", c.trap.flash_duration);
  dbl(f, "trap", "probe_time", c.trap.probe_time);

  dbl(f, "detection", "pixel_scale", c.detection.pixel_scale);
  dbl(f, "detection", "coverage", c.detection.coverage);
  dbl(f, "detection", "n_atoms", c.detection.n_atoms);
  flag(f, "detection", "ceil_pixels", c.detection.ceil_pixels);
  dbl(f, "detection", "reference_db", c.detection.reference_db);
  dbl(f, "detection", "reference_time", c.detection.reference_time);

  dbl(f, "pulse", "peak_rabi", c.pulse.spec.peak_rabi);
  dbl(f, "pulse", "duration", c.pulse.spec.duration);
  dbl(f, "pulse", "edge_time", c.pulse.spec.edge_time);
  dbl(f, "pulse", "two_photon_detuning", c.pulse.spec.two_photon_detuning);
  opt(f, "pulse", "design_width", c.pulse.design_width);
  dbl(f, "pulse", "edge_fraction", c.pulse.edge_fraction);

  opt(f, "cloud", "sigma_v", c.cloud.sigma_v);
  dbl(f, "cloud", "fall_time", c.cloud.fall_time);

  dbl(f, "geometry", "wavelength_1", c.geometry.wavelength_1);
  dbl(f, "geometry", "wavelength_2", c.geometry.wavelength_2);
  dbl(f, "geometry", "intensity_ratio", c.geometry.intensity_ratio);
  dbl(f, "geometry", "calibrated_ratio", c.geometry.calibrated_ratio);
  dbl(f, "geometry", "ac_stark_slope", c.geometry.ac_stark_slope);

  dbl(f, "constants", "hbar", c.constants.hbar);
  dbl(f, "constants", "k_boltzmann", c.constants.k_boltzmann);
  dbl(f, "constants", "mass", c.constants.mass);
  dbl(f, "constants", "gravity", c.constants.gravity);
  dbl(f, "constants", "wavelength", c.constants.wavelength);

  integer(f, "run", "seed", c.run.seed);
  integer(f, "run", "workers", c.run.workers);
  integer(f, "run", "bootstrap", c.run.bootstrap);
  dbl(f, "run", "confidence", c.run.confidence);
  return f;
}

template <class F>
void rethrow_as_config(const std::string& where, F&& body) {
  try {
    body();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

RampSchedule ScheduleConfig::resolve(double omega) const {
  RampSchedule s = preset == "custom" ? RampSchedule(segments) : RampSchedule::preset(preset, omega);
  return time_scale == 1.0 ? s : s.time_scaled(time_scale);
}

PulseSpec PulseSection::resolve() const {
  if (!design_width) return spec;
  PulseSpec p = design_pi_pulse(*design_width, edge_fraction);
  p.two_photon_detuning = spec.two_photon_detuning;
  return p;
}

void ExperimentConfig::validate() const {
  rethrow_as_config("model", [&] { model.validate(); });
  rethrow_as_config("schedule", [&] {
    if (!(schedule.time_scale > 0.0)) throw ConfigError("time_scale must be positive");
    if (schedule.preset != "custom" && !schedule.segments.empty())
      throw ConfigError("segments are only allowed with preset = custom");
    schedule.resolve(model.omega);
  });
  rethrow_as_config("step", [&] {
    if (!(step.tolerance > 0.0) || !(step.initial_dt > 0.0) || step.max_halvings < 0 || !(step.trace_interval > 0.0))
      throw ConfigError("step control values must be positive");
    if (!(step.krylov.tolerance > 0.0) || step.krylov.max_dimension < 2 || !(step.krylov.max_phase > 0.0))
      throw ConfigError("invalid Krylov options");
  });
  rethrow_as_config("noise", [&] {
    NoiseModel n{noise.sigma_mode.value_or(0.0), noise.contrast, noise.sigma_leftover};
    n.validate();
  });
  rethrow_as_config("sampling", [&] {
    SamplingSpec s;
    s.shots = sampling.shots;
    s.transfer_efficiency = sampling.transfer_efficiency.value_or(1.0);
    s.efficiency_jitter = sampling.efficiency_jitter;
    s.atom_number_jitter = sampling.atom_number_jitter;
    s.source_atoms = sampling.source_atoms;
    s.validate();
  });
  rethrow_as_config("trap", [&] {
    TrapConfig t{trap.frequencies, {}};
    t.validate();
    if (!(trap.free_velocity > 0.0)) throw ConfigError("free_velocity must be positive");
    if (!(trap.flash_start >= 0.0) || !(trap.flash_duration >= 0.0)) throw ConfigError("flash timing must be >= 0");
    if (!(trap.probe_time > trap.flash_start + trap.flash_duration))
      throw ConfigError("probe_time must follow the flash");
  });
  rethrow_as_config("detection", [&] {
    if (!(detection.pixel_scale > 0.0) || !(detection.coverage > 0.0) || !(detection.n_atoms > 1.0))
      throw ConfigError("detection geometry must be positive");
    if (!(detection.reference_time > 0.0)) throw ConfigError("reference_time must be positive");
  });
  rethrow_as_config("pulse", [&] {
    if (pulse.design_width && !(*pulse.design_width > 0.0)) throw ConfigError("design_width must be positive");
    pulse.resolve().validate();
  });
  rethrow_as_config("cloud", [&] {
    if (cloud.sigma_v && !(*cloud.sigma_v >= 0.0)) throw ConfigError("sigma_v must be >= 0");
    if (!(cloud.fall_time >= 0.0)) throw ConfigError("fall_time must be >= 0");
  });
  rethrow_as_config("geometry", [&] { geometry.validate(); });
  rethrow_as_config("constants", [&] {
    if (!(constants.hbar > 0.0) || !(constants.k_boltzmann > 0.0) || !(constants.mass > 0.0) ||
        !(constants.wavelength > 0.0) || !(constants.gravity >= 0.0))
      throw ConfigError("constants must be positive");
  });
  rethrow_as_config("run", [&] {
    if (run.workers < 1) throw ConfigError("workers must be >= 1");
    if (run.bootstrap < 0) throw ConfigError("bootstrap must be >= 0");
    if (!(run.confidence > 0.0 && run.confidence < 1.0)) throw ConfigError("confidence must lie in (0, 1)");
  });
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  auto table = fields(c);
  std::map<std::pair<std::string, std::string>, Field*> index;
  std::set<std::string> sections;
  for (auto& f : table) {
    index[{f.section, f.key}] = &f;
    sections.insert(f.section);
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find({section, key});
    if (it == index.end()) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert({section, key}).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      it->second->set(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + " (" + section + "." + key + "): " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  const auto table = fields(c);
  std::ostringstream out;
  std::string section;
  for (const auto& f : table) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  if (name == "paper_momentum") return c;
  if (name == "model_chain") {
    // Detection noise, velocity spread and transfer efficiency all come
    // from the upstream models.
    c.noise.sigma_mode.reset();
    c.cloud.sigma_v.reset();
    c.sampling.transfer_efficiency.reset();
    c.pulse.design_width = 50e3;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected paper_momentum or model_chain)");
}

}  // namespace twinfock
