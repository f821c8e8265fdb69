#include "twinfock/raman.hpp"

#include "twinfock/parallel.hpp"
#include "twinfock/spinor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace twinfock {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void PulseSpec::validate() const {
  if (!(peak_rabi > 0.0)) throw std::invalid_argument("peak_rabi must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("pulse duration must be positive");
  if (!(edge_time >= 0.0) || 2.0 * edge_time > duration * (1.0 + 1e-12))
    throw std::invalid_argument("edge_time must satisfy 0 <= 2 edge_time <= duration");
  if (!std::isfinite(two_photon_detuning)) throw std::invalid_argument("detuning must be finite");
}

double PulseSpec::envelope(double t) const {
  if (t < 0.0 || t > duration) return 0.0;
  if (edge_time == 0.0) return 1.0;
  const double s = std::numbers::pi / (2.0 * edge_time);
  if (t < edge_time) return std::pow(std::sin(s * t), 2);
  if (t > duration - edge_time) return std::pow(std::sin(s * (duration - t)), 2);
  return 1.0;
}

void VelocityCloud::validate() const {
  if (!(sigma_v >= 0.0)) throw std::invalid_argument("sigma_v must be >= 0");
  if (velocities.size() != weights.size()) throw std::invalid_argument("velocity weights must match velocities");
  if (discrete()) {
    double s = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("velocity weights must be non-negative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-10) throw std::invalid_argument("velocity weights must sum to 1");
  }
}

void BeamGeometry::validate() const {
  if (!(wavelength_1 > 0.0) || !(wavelength_2 > 0.0)) throw std::invalid_argument("wavelengths must be positive");
  if (!(intensity_ratio > 0.0) || !(calibrated_ratio > 0.0))
    throw std::invalid_argument("intensity ratios must be positive");
}

double BeamGeometry::k_eff() const { return kTwoPi * (1.0 / wavelength_1 + 1.0 / wavelength_2); }

double BeamGeometry::ac_stark_shift() const {
  return ac_stark_slope * (intensity_ratio / calibrated_ratio - 1.0);
}

double RecoilKinematics::doppler_shift(double v) const { return k_eff * v / kTwoPi; }

Temperatures RecoilKinematics::effective_temperature(double sigma_v, const Constants& c) const {
  return effective_temperatures(sigma_v, c);
}

RecoilKinematics recoil_kinematics(const BeamGeometry& geometry, const Constants& c) {
  geometry.validate();
  RecoilKinematics r;
  r.k_eff = geometry.k_eff();
  r.recoil_velocity_2hk = c.hbar * r.k_eff / c.mass;
  return r;
}

namespace {

using Vec = std::array<double, 3>;

Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

using Mat2 = std::array<std::complex<double>, 4>;  // row major

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// exp(-i a.sigma)
Mat2 su2(const Vec& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  const double c = std::cos(n);
  const double s = n > 0.0 ? std::sin(n) / n : 1.0;
  using C = std::complex<double>;
  return {C{c, -s * a[2]}, C{-s * a[1], -s * a[0]}, C{s * a[1], -s * a[0]}, C{c, s * a[2]}};
}

// H / h = (rabi/2) sigma_x - (delta/2) sigma_z as a Pauli vector.
Vec field(double rabi, double delta) { return {0.5 * rabi, 0.0, -0.5 * delta}; }

// Fourth-order Magnus step on [t, t + h] (two Gauss-Legendre nodes).
Mat2 magnus_step(const PulseSpec& p, double delta, double t, double h) {
  const double c = std::sqrt(3.0) / 6.0;
  const Vec h1 = field(p.peak_rabi * p.envelope(t + (0.5 - c) * h), delta);
  const Vec h2 = field(p.peak_rabi * p.envelope(t + (0.5 + c) * h), delta);
  const Vec x = cross(h2, h1);
  Vec a;
  const double k2 = std::sqrt(3.0) / 12.0 * h * h * 2.0 * kTwoPi * kTwoPi;
  for (int i = 0; i < 3; ++i) a[i] = 0.5 * h * kTwoPi * (h1[i] + h2[i]) + k2 * x[i];
  return su2(a);
}

Mat2 evolve_edge(const PulseSpec& p, double delta, double t0, double t1, int steps, Mat2 u) {
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) u = mul(magnus_step(p, delta, t0 + i * h, h), u);
  return u;
}

}  // namespace

double pulse_transfer(const PulseSpec& pulse, double detuning_total, const PulseOptions& opts) {
  pulse.validate();
  if (opts.edge_steps < 1) throw std::invalid_argument("edge_steps must be positive");
  Mat2 u{1.0, 0.0, 0.0, 1.0};
  const double e = pulse.edge_time;
  const double flat = pulse.duration - 2.0 * e;
  if (e > 0.0) u = evolve_edge(pulse, detuning_total, 0.0, e, opts.edge_steps, u);
  if (flat > 0.0) {
    // Constant Hamiltonian: one exact exponential.
    const Vec f = field(pulse.peak_rabi, detuning_total);
    u = mul(su2({kTwoPi * flat * f[0], 0.0, kTwoPi * flat * f[2]}), u);
  }
  if (e > 0.0) u = evolve_edge(pulse, detuning_total, pulse.duration - e, pulse.duration, opts.edge_steps, u);
  const double p = std::norm(u[2]);
  if (!std::isfinite(p)) throw NumericalError("pulse propagation produced a non-finite amplitude");
  return std::clamp(p, 0.0, 1.0);
}

double rabi_formula(double rabi, double detuning, double time) {
  const double w2 = rabi * rabi + detuning * detuning;
  if (w2 == 0.0) return 0.0;
  return 0.5 * rabi * rabi / w2 * (1.0 - std::cos(kTwoPi * std::sqrt(w2) * time));
}

PulseSpec design_pi_pulse(double target_fourier_width, double edge_fraction) {
  if (!(target_fourier_width > 0.0)) throw std::invalid_argument("Fourier width must be positive");
  if (!(edge_fraction >= 0.0 && edge_fraction <= 0.5)) throw std::invalid_argument("edge fraction must lie in [0, 0.5]");
  PulseSpec p;
  p.duration = 1.0 / target_fourier_width;
  p.edge_time = edge_fraction * p.duration;
  // Each sin^2 edge carries half the area of a rectangle of its length.
  p.peak_rabi = 1.0 / (2.0 * (p.duration - p.edge_time));
  p.two_photon_detuning = 0.0;
  return p;
}

double fourier_width(const PulseSpec& pulse) { return 1.0 / pulse.duration; }

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  QuadratureRule q;
  if (n == 1) {
    q.nodes = {0.0};
    q.weights = {1.0};
    return q;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigen-decomposition failed");
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    q.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    q.weights[static_cast<std::size_t>(i)] = v0 * v0;
  }
  return q;
}

namespace {

struct Evaluated {
  std::vector<double> v, w, p;
  double efficiency = 0.0;
};

Evaluated evaluate(const PulseSpec& pulse, const VelocityCloud& cloud, const BeamGeometry& geometry,
                   const RecoilKinematics& rk, int nodes, const PulseOptions& popts) {
  Evaluated e;
  if (cloud.discrete()) {
    e.v = cloud.velocities;
    e.w = cloud.weights;
  } else if (cloud.sigma_v == 0.0) {
    e.v = {cloud.mean_velocity};
    e.w = {1.0};
  } else {
    const QuadratureRule q = gauss_hermite(nodes);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      e.v.push_back(cloud.mean_velocity + cloud.sigma_v * q.nodes[i]);
      e.w.push_back(q.weights[i]);
    }
  }
  const double base = pulse.two_photon_detuning + geometry.ac_stark_shift();
  e.p.resize(e.v.size());
  for (std::size_t i = 0; i < e.v.size(); ++i) {
    e.p[i] = pulse_transfer(pulse, base + rk.doppler_shift(e.v[i]), popts);
    e.efficiency += e.w[i] * e.p[i];
  }
  return e;
}

VelocityCloud reweighted(const Evaluated& e, bool transferred, double sigma_hint) {
  VelocityCloud c;
  c.velocities = e.v;
  c.weights.resize(e.w.size());
  double s = 0.0, m = 0.0;
  for (std::size_t i = 0; i < e.w.size(); ++i) {
    c.weights[i] = e.w[i] * (transferred ? e.p[i] : 1.0 - e.p[i]);
    s += c.weights[i];
  }
  if (s <= 0.0) {
    // Nothing in this branch; keep the input distribution shape.
    c.weights = e.w;
    s = 1.0;
  }
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    c.weights[i] /= s;
    m += c.weights[i] * c.velocities[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < c.weights.size(); ++i) var += c.weights[i] * std::pow(c.velocities[i] - m, 2);
  c.mean_velocity = m;
  c.sigma_v = c.weights.size() > 1 ? std::sqrt(var) : sigma_hint;
  return c;
}

}  // namespace

EnsembleResult ensemble_efficiency(const PulseSpec& pulse, const VelocityCloud& cloud,
                                   const BeamGeometry& geometry, const Constants& c,
                                   const EnsembleOptions& opts) {
  pulse.validate();
  cloud.validate();
  geometry.validate();
  const RecoilKinematics rk = recoil_kinematics(geometry, c);
  const bool fixed = cloud.discrete() || cloud.sigma_v == 0.0;
  int n = opts.initial_nodes;
  Evaluated cur = evaluate(pulse, cloud, geometry, rk, n, opts.pulse);
  while (!fixed) {
    if (2 * n > opts.max_nodes) {
      std::ostringstream msg;
      msg << "velocity quadrature did not converge with " << n << " nodes";
      throw NumericalError(msg.str());
    }
    Evaluated next = evaluate(pulse, cloud, geometry, rk, 2 * n, opts.pulse);
    const double diff = std::abs(next.efficiency - cur.efficiency);
    cur = std::move(next);
    n *= 2;
    if (diff <= opts.relative_tolerance * std::max(std::abs(cur.efficiency), 1e-300)) break;
  }
  EnsembleResult r;
  r.efficiency = std::clamp(cur.efficiency, 0.0, 1.0);
  r.nodes = static_cast<int>(cur.v.size());
  r.surviving = reweighted(cur, false, cloud.sigma_v);
  r.transferred = reweighted(cur, true, cloud.sigma_v);
  return r;
}

Spectrum spectroscopy(const PulseSpec& pulse, const VelocityCloud& cloud, const BeamGeometry& geometry,
                      std::span<const double> delta_grid, double sigma_free, double sigma_collimated,
                      const Constants& c, int workers, const EnsembleOptions& opts) {
  if (delta_grid.size() < 3) throw std::invalid_argument("spectroscopy needs at least three detunings");
  if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) throw std::invalid_argument("detuning grid must be sorted");
  Spectrum s;
  s.detuning.assign(delta_grid.begin(), delta_grid.end());
  const std::size_t n = s.detuning.size();
  s.efficiency.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    PulseSpec p = pulse;
    p.two_photon_detuning = s.detuning[i];
    s.efficiency[i] = ensemble_efficiency(p, cloud, geometry, c, opts).efficiency;
  });
  const auto imax = static_cast<std::size_t>(std::max_element(s.efficiency.begin(), s.efficiency.end()) - s.efficiency.begin());
  s.peak_detuning = s.detuning[imax];
  const double half = 0.5 * s.efficiency[imax];
  std::size_t l = imax, r = imax;
  while (l > 0 && s.efficiency[l] > half) --l;
  while (r + 1 < n && s.efficiency[r] > half) ++r;
  auto at = [&](std::size_t a, std::size_t b) {
    return s.detuning[a] + (half - s.efficiency[a]) * (s.detuning[b] - s.detuning[a]) / (s.efficiency[b] - s.efficiency[a]);
  };
  const double xl = s.efficiency[l] <= half ? at(l, l + 1) : s.detuning[l];
  const double xr = s.efficiency[r] <= half ? at(r - 1, r) : s.detuning[r];
  s.fwhm = xr - xl;

  const RecoilKinematics rk = recoil_kinematics(geometry, c);
  const double centre = -(rk.doppler_shift(cloud.mean_velocity) + geometry.ac_stark_shift());
  s.overlay_sigma_free = rk.doppler_shift(sigma_free);
  s.overlay_sigma_collimated = rk.doppler_shift(sigma_collimated);
  for (double d : s.detuning) {
    s.overlay_free.push_back(std::exp(-0.5 * std::pow((d - centre) / s.overlay_sigma_free, 2)));
    s.overlay_collimated.push_back(std::exp(-0.5 * std::pow((d - centre) / s.overlay_sigma_collimated, 2)));
  }
  return s;
}

DoublePulse double_pulse(const PulseSpec& pulse1, const PulseSpec& pulse2, const VelocityCloud& cloud,
                         const BeamGeometry& geometry, const Constants& c, const EnsembleOptions& opts) {
  pulse1.validate();
  pulse2.validate();
  cloud.validate();
  geometry.validate();
  const RecoilKinematics rk = recoil_kinematics(geometry, c);
  // Both pulses share the nodes: eta2 = sum w P1 P2 / sum w P1.
  auto at = [&](int n) {
    const Evaluated e1 = evaluate(pulse1, cloud, geometry, rk, n, opts.pulse);
    VelocityCloud moved;
    moved.velocities = e1.v;
    moved.weights = e1.w;
    const Evaluated e2 = evaluate(pulse2, moved, geometry, rk, n, opts.pulse);
    double num = 0.0;
    for (std::size_t i = 0; i < e1.p.size(); ++i) num += e1.w[i] * e1.p[i] * e2.p[i];
    DoublePulse d;
    d.eta1 = std::clamp(e1.efficiency, 0.0, 1.0);
    d.eta2 = e1.efficiency > 0.0 ? std::clamp(num / e1.efficiency, 0.0, 1.0) : 0.0;
    return d;
  };
  int n = opts.initial_nodes;
  DoublePulse cur = at(n);
  if (cloud.discrete() || cloud.sigma_v == 0.0) return cur;
  for (;;) {
    if (2 * n > opts.max_nodes) throw NumericalError("double-pulse quadrature did not converge");
    const DoublePulse next = at(2 * n);
    n *= 2;
    const bool done = std::abs(next.eta1 - cur.eta1) <= opts.relative_tolerance * std::max(next.eta1, 1e-300) &&
                      std::abs(next.eta2 - cur.eta2) <= opts.relative_tolerance * std::max(next.eta2, 1e-300);
    cur = next;
    if (done) return cur;
  }
}

double fall_velocity(double fall_time, const Constants& c) { return c.gravity * fall_time; }

double mode_separation(double time, const BeamGeometry& geometry, const Constants& c) {
  return recoil_kinematics(geometry, c).recoil_velocity_2hk * time;
}

}  // namespace twinfock
