#include "twinfock/measurement.hpp"

#include "twinfock/parallel.hpp"
#include "twinfock/rng.hpp"
#include "twinfock/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace twinfock {

std::string to_string(Cycle c) { return c == Cycle::Jz ? "Jz" : "Jperp"; }

Cycle cycle_from_string(const std::string& s) {
  if (s == "Jz") return Cycle::Jz;
  if (s == "Jperp") return Cycle::Jperp;
  throw std::invalid_argument("unknown cycle '" + s + "' (expected Jz or Jperp)");
}

void NoiseModel::validate() const {
  if (!(sigma_mode >= 0.0) || !std::isfinite(sigma_mode)) throw std::invalid_argument("sigma_mode must be >= 0");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw std::invalid_argument("contrast must lie in (0, 1]");
  if (sigma_leftover && !(*sigma_leftover >= 0.0)) throw std::invalid_argument("sigma_leftover must be >= 0");
}

void SamplingSpec::validate() const {
  if (shots == 0) throw std::invalid_argument("shots must be positive");
  if (!(transfer_efficiency > 0.0 && transfer_efficiency <= 1.0))
    throw std::invalid_argument("transfer_efficiency must lie in (0, 1]");
  if (!(efficiency_jitter >= 0.0)) throw std::invalid_argument("efficiency_jitter must be >= 0");
  if (!(atom_number_jitter >= 0.0)) throw std::invalid_argument("atom_number_jitter must be >= 0");
  if (!(source_atoms >= 0.0) || !std::isfinite(source_atoms)) throw std::invalid_argument("source_atoms must be >= 0");
}

namespace {

double normal(std::mt19937_64& eng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return sigma * standard_normal(eng);
}

long binomial(std::mt19937_64& eng, long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<long> d(n, p);
  return d(eng);
}

class SectorSampler {
 public:
  explicit SectorSampler(const SpinorState& state) : n_atoms_(state.basis().n_atoms()) {
    const auto& a = state.amplitudes();
    cdf_.resize(a.size());
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) cdf_[k] = (s += std::norm(a[k]));
    for (double& c : cdf_) c /= s;
    cdf_.back() = 1.0;
  }

  // Pair number per mode, rescaled to the (jittered) source atom number.
  long draw(std::mt19937_64& eng, const SamplingSpec& spec) const {
    const double u = uniform01(eng);
    long k = static_cast<long>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    k = std::min<long>(k, static_cast<long>(cdf_.size()) - 1);
    const double mean = spec.source_atoms > 0.0 ? spec.source_atoms : n_atoms_;
    const double jitter = spec.atom_number_jitter;
    if (jitter > 0.0 || mean != n_atoms_) {
      double n_shot = mean;
      if (jitter > 0.0) {
        const double s = std::sqrt(std::log1p(jitter * jitter));
        n_shot = mean * std::exp(s * standard_normal(eng) - 0.5 * s * s);
      }
      n_shot = std::round(n_shot);
      k = std::min(static_cast<long>(std::llround(k * n_shot / n_atoms_)), static_cast<long>(n_shot / 2));
      k = std::max(k, 0L);
    }
    return k;
  }

 private:
  int n_atoms_;
  std::vector<double> cdf_;
};

double shot_efficiency(std::mt19937_64& eng, const SamplingSpec& spec) {
  if (spec.efficiency_jitter == 0.0) return spec.transfer_efficiency;
  return std::clamp(spec.transfer_efficiency + spec.efficiency_jitter * standard_normal(eng), 0.0, 1.0);
}

long draw_rotated(std::mt19937_64& eng, long k, std::vector<double>& w) {
  pi2_weights(static_cast<int>(k), w);
  double total = 0.0;
  for (double x : w) total += x;
  const double u = uniform01(eng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<long>(i) - k;
  }
  // Rounding left u at the top of the range: fall back to the last nonzero.
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0.0) return static_cast<long>(i) - k;
  return 0;
}

void check_inputs(const SpinorState& state, const SamplingSpec& spec, const NoiseModel& noise) {
  spec.validate();
  noise.validate();
  state.require_normalized();
}

}  // namespace

std::vector<CountRecord> sample_jz(const SpinorState& state, const SamplingSpec& spec,
                                   const NoiseModel& noise) {
  check_inputs(state, spec, noise);
  const SectorSampler sectors(state);
  std::vector<CountRecord> out(spec.shots);
  parallel_for(spec.shots, spec.workers, [&](std::size_t s) {
    auto eng = make_engine(spec.seed, Stream::Jz, s);
    const long k = sectors.draw(eng, spec);
    const double eta = shot_efficiency(eng, spec);
    const long moved = binomial(eng, k, eta);
    CountRecord r;
    r.shot = s;
    r.cycle = Cycle::Jz;
    r.n_a = static_cast<double>(k) + normal(eng, noise.sigma_mode);
    r.n_b = static_cast<double>(moved) + normal(eng, noise.sigma_mode);
    r.n_leftover = static_cast<double>(k - moved) + normal(eng, noise.leftover_sigma());
    out[s] = r;
  });
  return out;
}

std::vector<CountRecord> sample_jperp(const SpinorState& state, const SamplingSpec& spec,
                                      const NoiseModel& noise) {
  check_inputs(state, spec, noise);
  const SectorSampler sectors(state);
  std::vector<CountRecord> out(spec.shots);
  parallel_for(spec.shots, spec.workers, [&](std::size_t s) {
    thread_local std::vector<double> weights;
    auto eng = make_engine(spec.seed, Stream::Jperp, s);
    const long k = sectors.draw(eng, spec);
    long m = 0;
    if (uniform01(eng) < noise.contrast) m = draw_rotated(eng, k, weights);
    else m = binomial(eng, 2 * k, 0.5) - k;
    CountRecord r;
    r.shot = s;
    r.cycle = Cycle::Jperp;
    r.n_a = static_cast<double>(k + m) + normal(eng, noise.sigma_mode);
    r.n_b = static_cast<double>(k - m) + normal(eng, noise.sigma_mode);
    r.n_leftover = 0.0;
    out[s] = r;
  });
  return out;
}

std::vector<CountRecord> css_reference(int n_atoms, Cycle cycle, const SamplingSpec& spec,
                                       const NoiseModel& noise) {
  if (n_atoms < 2) throw std::invalid_argument("css_reference needs n_atoms >= 2");
  spec.validate();
  noise.validate();
  std::vector<CountRecord> out(spec.shots);
  const Stream stream = cycle == Cycle::Jz ? Stream::CssJz : Stream::CssJperp;
  parallel_for(spec.shots, spec.workers, [&](std::size_t s) {
    auto eng = make_engine(spec.seed, stream, s);
    double p = 0.5;
    if (cycle == Cycle::Jperp) p = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * uniform01(eng)));
    const long a = binomial(eng, n_atoms, p);
    CountRecord r;
    r.shot = s;
    r.cycle = cycle;
    r.n_a = static_cast<double>(a) + normal(eng, noise.sigma_mode);
    r.n_b = static_cast<double>(n_atoms - a) + normal(eng, noise.sigma_mode);
    r.n_leftover = 0.0;
    out[s] = r;
  });
  return out;
}

ConditionalResult conditional_correct(std::span<const CountRecord> records) {
  ConditionalResult res;
  res.records.assign(records.begin(), records.end());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].cycle == Cycle::Jz) idx.push_back(i);
  if (idx.size() < 2) throw std::invalid_argument("conditional correction needs at least two Jz records");
  const double n = static_cast<double>(idx.size());
  double md = 0.0, ml = 0.0;
  for (std::size_t i : idx) {
    md += records[i].n_a - records[i].n_b;
    ml += records[i].n_leftover;
  }
  md /= n;
  ml /= n;
  double cov = 0.0, var_l = 0.0, var_d = 0.0;
  for (std::size_t i : idx) {
    const double d = records[i].n_a - records[i].n_b - md;
    const double l = records[i].n_leftover - ml;
    cov += d * l;
    var_l += l * l;
    var_d += d * d;
  }
  if (var_l <= 1e-12 * std::max(var_d, 1.0)) {
    res.beta = 0.0;
    res.warnings.push_back("leftover counts have zero variance; beta set to 0");
  } else {
    res.beta = cov / var_l;
  }
  res.variance_before = 0.25 * var_d / (n - 1.0);
  const double var_after = var_d - 2.0 * res.beta * cov + res.beta * res.beta * var_l;
  res.variance_after = 0.25 * std::max(var_after, 0.0) / (n - 1.0);
  for (std::size_t i : idx) {
    auto& r = res.records[i];
    r.n_b += res.beta * r.n_leftover;
    r.n_leftover = 0.0;
  }
  return res;
}

double to_db(double x, bool* floored) {
  const double floor_lin = std::pow(10.0, kDbFloor / 10.0);
  const bool clip = !(x > floor_lin);
  if (floored) *floored = clip;
  return clip ? kDbFloor : 10.0 * std::log10(x);
}

namespace {

struct Prepared {
  std::vector<double> jz;     // half-differences
  std::vector<double> nz;     // totals
  std::vector<double> jperp2; // J_perp^2
  std::vector<double> np;
  std::uint64_t excluded_z = 0, excluded_perp = 0;
};

Prepared prepare(std::span<const CountRecord> z, std::span<const CountRecord> perp) {
  Prepared p;
  for (const auto& r : z) {
    const double n = r.n_a + r.n_b;
    if (n <= 1.0) {
      ++p.excluded_z;
      continue;
    }
    p.jz.push_back(0.5 * (r.n_a - r.n_b));
    p.nz.push_back(n);
  }
  for (const auto& r : perp) {
    const double n = r.n_a + r.n_b;
    if (n <= 1.0) {
      ++p.excluded_perp;
      continue;
    }
    const double j = 0.5 * (r.n_a - r.n_b);
    p.jperp2.push_back(j * j);
    p.np.push_back(n);
  }
  if (p.jz.size() < 2 || p.jperp2.size() < 2)
    throw std::invalid_argument("squeezing report needs at least two usable shots per cycle");
  return p;
}

struct Stats {
  double mean_n = 0.0, var = 0.0, m2 = 0.0, ns = 0.0, xi2 = 0.0, frac = 0.0;
};

template <class IndexZ, class IndexP>
Stats compute(const Prepared& p, IndexZ&& iz, std::size_t nz, IndexP&& ip, std::size_t np) {
  Stats s;
  double sum = 0.0, sum2 = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < nz; ++i) {
    const std::size_t k = iz(i);
    sum += p.jz[k];
    sum2 += p.jz[k] * p.jz[k];
    sn += p.nz[k];
  }
  const double fz = static_cast<double>(nz);
  const double mean = sum / fz;
  s.var = std::max(0.0, (sum2 - fz * mean * mean) / (fz - 1.0));
  s.mean_n = sn / fz;
  double a = 0.0, b = 0.0, m2 = 0.0, npm = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    const std::size_t k = ip(i);
    const double n = p.np[k];
    a += p.jperp2[k] / (n - 1.0);
    b += 0.5 * n / (n - 1.0);
    m2 += p.jperp2[k];
    npm += n;
  }
  const double fp = static_cast<double>(np);
  const double denom = 2.0 * a / fp - b / fp;
  s.m2 = m2 / fp;
  npm /= fp;
  s.ns = 4.0 * s.var / s.mean_n;
  s.xi2 = denom > 0.0 ? s.var / denom : std::numeric_limits<double>::infinity();
  s.frac = s.m2 / (npm * (npm + 2.0) / 8.0);
  return s;
}

double quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SqueezingReport fill(const Prepared& p, const Stats& s) {
  SqueezingReport r;
  r.n_shots_z = p.jz.size();
  r.n_shots_perp = p.jperp2.size();
  r.excluded_z = p.excluded_z;
  r.excluded_perp = p.excluded_perp;
  r.mean_atoms = s.mean_n;
  r.variance_jz = s.var;
  r.jperp_second_moment = s.m2;
  r.number_squeezing = s.ns;
  r.number_squeezing_db = to_db(s.ns);
  r.xi2 = s.xi2;
  r.xi2_db = to_db(s.xi2, &r.xi2_floored);
  r.jperp_fraction = s.frac;
  r.number_squeezing_db_ci = {r.number_squeezing_db, r.number_squeezing_db};
  r.xi2_ci = {s.xi2, s.xi2};
  r.xi2_db_ci = {r.xi2_db, r.xi2_db};
  r.jperp_fraction_ci = {s.frac, s.frac};
  r.entangled = s.xi2 < 1.0;
  return r;
}

}  // namespace

SqueezingReport squeezing_point(std::span<const CountRecord> records_z,
                                std::span<const CountRecord> records_perp) {
  const Prepared p = prepare(records_z, records_perp);
  auto id = [](std::size_t i) { return i; };
  return fill(p, compute(p, id, p.jz.size(), id, p.jperp2.size()));
}

SqueezingReport squeezing_report(std::span<const CountRecord> records_z,
                                 std::span<const CountRecord> records_perp,
                                 const ReportOptions& options) {
  if (options.bootstrap < 0) throw std::invalid_argument("bootstrap count must be >= 0");
  if (!(options.confidence > 0.0 && options.confidence < 1.0))
    throw std::invalid_argument("confidence must lie in (0, 1)");
  const Prepared p = prepare(records_z, records_perp);
  auto id = [](std::size_t i) { return i; };
  SqueezingReport r = fill(p, compute(p, id, p.jz.size(), id, p.jperp2.size()));
  r.bootstrap = options.bootstrap;
  if (options.bootstrap == 0) return r;

  const auto nb = static_cast<std::size_t>(options.bootstrap);
  std::vector<Stats> boot(nb);
  const std::size_t nz = p.jz.size(), np = p.jperp2.size();
  parallel_for(nb, options.workers, [&](std::size_t b) {
    auto eng = make_engine(options.seed, Stream::Bootstrap, b);
    std::uniform_int_distribution<std::size_t> dz(0, nz - 1), dp(0, np - 1);
    std::vector<std::size_t> iz(nz), ip(np);
    for (auto& v : iz) v = dz(eng);
    for (auto& v : ip) v = dp(eng);
    auto fz = [&](std::size_t i) { return iz[i]; };
    auto fp = [&](std::size_t i) { return ip[i]; };
    boot[b] = compute(p, fz, nz, fp, np);
  });
  const double lo = 0.5 * (1.0 - options.confidence), hi = 1.0 - lo;
  auto interval = [&](auto field) {
    std::vector<double> v(nb);
    for (std::size_t b = 0; b < nb; ++b) v[b] = field(boot[b]);
    const double a = quantile(v, lo);
    return Interval{a, quantile(v, hi)};
  };
  const Interval ns = interval([](const Stats& s) { return s.ns; });
  r.number_squeezing_db_ci = {to_db(ns.lo), to_db(ns.hi)};
  r.xi2_ci = interval([](const Stats& s) { return s.xi2; });
  r.xi2_db_ci = {to_db(r.xi2_ci.lo), to_db(r.xi2_ci.hi)};
  r.jperp_fraction_ci = interval([](const Stats& s) { return s.frac; });
  r.entangled = r.xi2_ci.hi < 1.0;
  return r;
}

}  // namespace twinfock
