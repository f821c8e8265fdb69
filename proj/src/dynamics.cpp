#include "twinfock/dynamics.hpp"

#include "twinfock/kernels.hpp"
#include "twinfock/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace twinfock {

RampSchedule::RampSchedule(std::vector<RampSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("ramp schedule needs at least one segment");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.duration > 0.0) || !std::isfinite(s.duration))
      throw std::invalid_argument("ramp segment durations must be positive");
    if (!std::isfinite(s.q_start) || !std::isfinite(s.q_end))
      throw std::invalid_argument("ramp segment endpoints must be finite");
    if (i > 0) {
      const double prev = segments_[i - 1].q_end;
      if (std::abs(prev - s.q_start) > 1e-9 * std::max(1.0, std::abs(prev)))
        throw std::invalid_argument("ramp schedule is discontinuous at segment " + std::to_string(i));
    }
  }
}

RampSchedule RampSchedule::fig_s1c_default(double omega) {
  const double a = std::abs(omega);
  if (a == 0.0) throw std::invalid_argument("fig_s1c_default needs omega != 0");
  return RampSchedule({{0.120, 13.0 * a, 2.4 * a},
                       {0.350, 2.4 * a, 1.6 * a},
                       {0.275, 1.6 * a, 0.0},
                       {0.275, 0.0, -1.6 * a}});
}

RampSchedule RampSchedule::constant(double q, double duration) {
  return RampSchedule({{duration, q, q}});
}

RampSchedule RampSchedule::linear(double q_start, double q_end, double duration) {
  return RampSchedule({{duration, q_start, q_end}});
}

RampSchedule RampSchedule::preset(const std::string& name, double omega) {
  if (name == "fig_s1c_default") return fig_s1c_default(omega);
  if (name == "linear_1020ms") return linear(13.0 * std::abs(omega), -1.6 * std::abs(omega), 1.020);
  throw std::invalid_argument("unknown schedule preset '" + name + "'");
}

double RampSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments_) t += s.duration;
  return t;
}

double RampSchedule::q_at(double t) const {
  if (segments_.empty()) throw std::logic_error("empty ramp schedule");
  double t0 = 0.0;
  for (const auto& s : segments_) {
    if (t <= t0 + s.duration) {
      const double u = std::clamp((t - t0) / s.duration, 0.0, 1.0);
      return s.q_start + (s.q_end - s.q_start) * u;
    }
    t0 += s.duration;
  }
  return segments_.back().q_end;
}

double RampSchedule::q_start() const { return segments_.front().q_start; }
double RampSchedule::q_end() const { return segments_.back().q_end; }

std::vector<double> RampSchedule::breakpoints() const {
  std::vector<double> b{0.0};
  double t = 0.0;
  for (const auto& s : segments_) b.push_back(t += s.duration);
  return b;
}

RampSchedule RampSchedule::time_scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("time scale factor must be positive");
  auto segs = segments_;
  for (auto& s : segs) s.duration *= factor;
  return RampSchedule(std::move(segs));
}

RampSchedule RampSchedule::reversed() const {
  std::vector<RampSegment> segs(segments_.rbegin(), segments_.rend());
  for (auto& s : segs) std::swap(s.q_start, s.q_end);
  return RampSchedule(std::move(segs));
}

namespace {

// Number of eigenvalues below x (Sturm sequence of the LDL^T pivots).
std::size_t sturm_count(const TridiagonalOperator& op, double x) {
  const std::size_t n = op.dimension();
  std::size_t count = 0;
  double d = op.diagonal[0] - x;
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    if (d == 0.0) d = tiny;
    const double b = op.off_diagonal[i - 1];
    d = (op.diagonal[i] - x) - b * b / d;
    if (d < 0.0) ++count;
  }
  return count;
}

// Solves (T - sigma) x = rhs in place by LDL^T; T - sigma must be positive definite.
void shifted_solve(const TridiagonalOperator& op, double sigma, std::vector<double>& rhs,
                   std::vector<double>& pivots) {
  const std::size_t n = op.dimension();
  pivots.resize(n);
  pivots[0] = op.diagonal[0] - sigma;
  for (std::size_t i = 1; i < n; ++i) {
    const double l = op.off_diagonal[i - 1] / pivots[i - 1];
    pivots[i] = (op.diagonal[i] - sigma) - l * op.off_diagonal[i - 1];
    rhs[i] -= l * rhs[i - 1];
  }
  rhs[n - 1] /= pivots[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - op.off_diagonal[i] * rhs[i + 1]) / pivots[i];
}

}  // namespace

GroundState ground_state(const TridiagonalOperator& op, const EigenOptions& options) {
  const std::size_t n = op.dimension();
  if (n == 0) throw std::invalid_argument("empty operator");
  if (op.off_diagonal.size() + 1 != n) throw std::invalid_argument("malformed tridiagonal operator");
  auto [lo, hi] = op.spectral_bounds();
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  double a = lo, b = hi;
  for (int it = 0; it < 200 && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() * scale; ++it) {
    const double mid = 0.5 * (a + b);
    if (sturm_count(op, mid) >= 1) b = mid;
    else a = mid;
  }
  const double lambda = 0.5 * (a + b);
  const double sigma = lambda - 1e-10 * scale;

  std::vector<double> v(n), pivots;
  for (std::size_t k = 0; k < n; ++k) v[k] = 1.0 + 0.25 * std::sin(0.618034 * static_cast<double>(k + 1));
  std::vector<cplx> vc(n), hv(n);
  double energy = lambda, residual = INFINITY;
  for (int it = 0; it < options.max_iterations; ++it) {
    shifted_solve(op, sigma, v, pivots);
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (!std::isfinite(nrm) || nrm == 0.0) throw NumericalError("inverse iteration broke down");
    for (double& x : v) x /= nrm;
    for (std::size_t k = 0; k < n; ++k) vc[k] = v[k];
    kernels::tridiag_apply(op.diagonal, op.off_diagonal, vc, hv);
    energy = kernels::real_dot(vc, hv);
    double r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) r2 += std::norm(hv[k] - energy * vc[k]);
    residual = std::sqrt(r2);
    if (residual < options.residual_tolerance * scale && it >= 1) break;
  }
  if (!(residual < options.residual_tolerance * scale)) {
    std::ostringstream msg;
    msg << "ground state did not converge: residual " << residual << " after "
        << options.max_iterations << " iterations";
    throw NumericalError(msg.str());
  }
  // Sign convention: largest-magnitude component positive.
  const auto big = std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double sgn = *big < 0 ? -1.0 : 1.0;
  std::vector<cplx> amps(n);
  for (std::size_t k = 0; k < n; ++k) amps[k] = sgn * v[k];
  // Only the dimension is known here; callers with an odd atom number
  // rebind the amplitudes to their own basis.
  const PairBasis basis(static_cast<int>(2 * std::max<std::size_t>(n - 1, 1)));
  return GroundState{SpinorState(basis, std::move(amps)), energy, residual};
}

namespace {

GroundState ground_state_on(const PairBasis& basis, const TridiagonalOperator& op) {
  GroundState gs = ground_state(op);
  gs.state = SpinorState(basis, gs.state.amplitudes());
  return gs;
}

struct RunOutput {
  SpinorState final_state;
  std::vector<double> times, q, pf;
  std::vector<std::vector<cplx>> trace_states;
};

RunOutput run_fixed(const SpinorState& initial, const ModelParams& params,
                    const RampSchedule& schedule, const StepControl& control, double dt,
                    bool keep_states) {
  const double total = schedule.total_duration();
  std::vector<double> marks = schedule.breakpoints();
  std::vector<double> trace_times;
  if (control.trace_interval > 0.0) {
    const auto count = static_cast<std::size_t>(std::floor(total / control.trace_interval + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) trace_times.push_back(std::min(total, i * control.trace_interval));
  } else {
    trace_times.push_back(0.0);
  }
  if (total - trace_times.back() > 1e-12 * std::max(1.0, total)) trace_times.push_back(total);
  marks.insert(marks.end(), trace_times.begin(), trace_times.end());
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(),
                          [&](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, total); }),
              marks.end());

  TridiagonalOperator op = build_hamiltonian(params.with_q(0.0));
  const std::vector<double> base = op.diagonal;
  std::vector<double> level(base.size());
  for (std::size_t k = 0; k < level.size(); ++k) level[k] = 2.0 * static_cast<double>(k);

  KrylovPropagator prop(control.krylov);
  RunOutput out{initial, {}, {}, {}, {}};
  std::vector<cplx>& psi = out.final_state.amplitudes();
  std::size_t next_trace = 0;
  auto record = [&](double t) {
    while (next_trace < trace_times.size() && std::abs(trace_times[next_trace] - t) <= 1e-12 * std::max(1.0, total)) {
      out.times.push_back(trace_times[next_trace]);
      out.q.push_back(schedule.q_at(trace_times[next_trace]));
      out.pf.push_back(pair_fraction(out.final_state));
      if (keep_states) out.trace_states.push_back(psi);
      ++next_trace;
    }
  };
  record(0.0);
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    const double t0 = marks[i], t1 = marks[i + 1];
    const auto nsub = static_cast<std::size_t>(std::max(1.0, std::ceil((t1 - t0) / dt - 1e-9)));
    const double h = (t1 - t0) / static_cast<double>(nsub);
    for (std::size_t s = 0; s < nsub; ++s) {
      const double qm = schedule.q_at(t0 + (static_cast<double>(s) + 0.5) * h);
      for (std::size_t k = 0; k < base.size(); ++k) op.diagonal[k] = base[k] + qm * level[k];
      prop.propagate(op, psi, h);
    }
    record(t1);
  }
  return out;
}

SweepResult finish(RunOutput&& run, const ModelParams& params, const RampSchedule& schedule,
                   const StepControl& control, double dt, int halvings) {
  SweepResult r{std::move(run.final_state), std::move(run.times), std::move(run.q), std::move(run.pf),
                {}, params, schedule, control, dt, halvings, 0.0};
  r.norm_deviation = std::abs(r.final_state.norm() - 1.0);
  if (control.ground_overlap) {
    const PairBasis& basis = r.final_state.basis();
    r.ground_overlap_trace.reserve(r.times.size());
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const GroundState gs = ground_state_on(basis, build_hamiltonian(params.with_q(r.q[i])));
      const SpinorState at(basis, run.trace_states[i]);
      r.ground_overlap_trace.push_back(std::min(1.0, gs.state.fidelity(at)));
    }
  }
  return r;
}

}  // namespace

SweepResult evolve_fixed_step(const SpinorState& initial, const ModelParams& params,
                              const RampSchedule& schedule, const StepControl& control,
                              double dt) {
  params.validate();
  initial.require_normalized();
  if (initial.basis().n_atoms() != params.n_atoms) throw std::invalid_argument("state and model atom numbers differ");
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  auto run = run_fixed(initial, params, schedule, control, dt, control.ground_overlap);
  return finish(std::move(run), params, schedule, control, dt, 0);
}

SweepResult evolve(const SpinorState& initial, const ModelParams& params,
                   const RampSchedule& schedule, const StepControl& control) {
  params.validate();
  initial.require_normalized();
  if (initial.basis().n_atoms() != params.n_atoms) throw std::invalid_argument("state and model atom numbers differ");
  if (!(control.initial_dt > 0.0) || !(control.tolerance > 0.0))
    throw std::invalid_argument("step control needs positive initial_dt and tolerance");
  double dt = control.initial_dt;
  RunOutput coarse = run_fixed(initial, params, schedule, control, dt, false);
  double diff = INFINITY;
  for (int h = 1; h <= control.max_halvings; ++h) {
    RunOutput fine = run_fixed(initial, params, schedule, control, dt / 2, control.ground_overlap);
    diff = 0.0;
    for (std::size_t i = 0; i < fine.pf.size(); ++i) diff = std::max(diff, std::abs(fine.pf[i] - coarse.pf[i]));
    dt /= 2;
    if (diff < control.tolerance) return finish(std::move(fine), params, schedule, control, dt, h);
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "step control did not converge: pair-fraction change " << diff << " at dt = " << dt
      << " s after " << control.max_halvings << " halvings (tolerance " << control.tolerance << ")";
  throw NumericalError(msg.str());
}

SpinorState evolve_constant(const SpinorState& initial, const TridiagonalOperator& op,
                            double duration, const KrylovOptions& options) {
  KrylovPropagator prop(options);
  SpinorState out = initial;
  prop.propagate(op, out.amplitudes(), duration);
  return out;
}

namespace {

// Second-order finite differences on a non-uniform grid.
void derivatives(const std::vector<double>& x, const std::vector<double>& y,
                 std::vector<double>& d1, std::vector<double>& d2) {
  const std::size_t n = x.size();
  d1.assign(n, 0.0);
  d2.assign(n, 0.0);
  if (n < 3) return;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
    d1[i] = (y[i + 1] * hl * hl - y[i - 1] * hr * hr + y[i] * (hr * hr - hl * hl)) / (hl * hr * (hl + hr));
    d2[i] = 2.0 * (y[i + 1] * hl + y[i - 1] * hr - y[i] * (hl + hr)) / (hl * hr * (hl + hr));
  }
  d1[0] = (y[1] - y[0]) / (x[1] - x[0]);
  d1[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
  d2[0] = d2[1];
  d2[n - 1] = d2[n - 2];
}

// Parabolic vertex through (i-1, i, i+1).
double refine_peak(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  if (i == 0 || i + 1 >= x.size()) return x[i];
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  if (a == 0.0) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

double half_max_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  const double half = 0.5 * y[i];
  auto cross = [&](std::size_t a, std::size_t b) {
    return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
  };
  std::size_t l = i, r = i;
  while (l > 0 && y[l] > half) --l;
  while (r + 1 < y.size() && y[r] > half) ++r;
  const double xl = y[l] <= half ? cross(l, l + 1) : x[l];
  const double xr = y[r] <= half ? cross(r - 1, r) : x[r];
  return xr - xl;
}

}  // namespace

PhaseScan phase_scan(int n_atoms, double omega, std::span<const double> q_grid, int workers) {
  if (omega == 0.0) throw std::invalid_argument("phase scan needs omega != 0");
  if (q_grid.size() < 5) throw std::invalid_argument("phase scan needs at least five grid points");
  if (!std::is_sorted(q_grid.begin(), q_grid.end()) ||
      std::adjacent_find(q_grid.begin(), q_grid.end()) != q_grid.end())
    throw std::invalid_argument("q grid must be strictly increasing");
  PhaseScan scan;
  scan.n_atoms = n_atoms;
  scan.omega = omega;
  const std::size_t n = q_grid.size();
  scan.q_over_omega.resize(n);
  scan.pair_fraction.resize(n);
  const ModelParams base{n_atoms, omega, 0.0};
  base.validate();
  const PairBasis basis(n_atoms);
  parallel_for(n, workers, [&](std::size_t i) {
    scan.q_over_omega[i] = q_grid[i] / std::abs(omega);
    const GroundState gs = ground_state_on(basis, build_hamiltonian(base.with_q(q_grid[i])));
    scan.pair_fraction[i] = pair_fraction(gs.state);
  });
  derivatives(scan.q_over_omega, scan.pair_fraction, scan.slope, scan.curvature);
  const auto imax = static_cast<std::size_t>(std::max_element(scan.curvature.begin(), scan.curvature.end()) - scan.curvature.begin());
  const auto imin = static_cast<std::size_t>(std::min_element(scan.curvature.begin(), scan.curvature.end()) - scan.curvature.begin());
  scan.upper_transition = refine_peak(scan.q_over_omega, scan.curvature, imax);
  std::vector<double> neg(scan.curvature.size());
  std::transform(scan.curvature.begin(), scan.curvature.end(), neg.begin(), [](double c) { return -c; });
  scan.lower_transition = refine_peak(scan.q_over_omega, neg, imin);
  scan.upper_peak_width = half_max_width(scan.q_over_omega, scan.curvature, imax);
  scan.lower_peak_width = half_max_width(scan.q_over_omega, neg, imin);
  return scan;
}

long find_interior_maximum(std::span<const double> values, double prominence) {
  if (values.size() < 3) return -1;
  const auto it = std::max_element(values.begin(), values.end());
  const auto i = it - values.begin();
  if (i == 0 || i + 1 == static_cast<long>(values.size())) return -1;
  if (*it - values.back() <= prominence || *it - values.front() <= prominence) return -1;
  return i;
}

OscillationProbe oscillation_probe(const ModelParams& params, const RampSchedule& schedule,
                                   const StepControl& control) {
  if (schedule.q_end() <= -2.0 * std::abs(params.omega))
    throw std::invalid_argument("oscillation probe expects a schedule ending above q/|omega| = -2");
  StepControl c = control;
  c.ground_overlap = false;
  const PairBasis basis(params.n_atoms);
  const GroundState gs0 = ground_state_on(basis, build_hamiltonian(params.with_q(schedule.q_start())));
  const SweepResult r = evolve(gs0.state, params, schedule, c);
  OscillationProbe p;
  p.times = r.times;
  p.pair_fraction = r.pair_fraction_trace;
  p.final_value = p.pair_fraction.back();
  const auto it = std::max_element(p.pair_fraction.begin(), p.pair_fraction.end());
  p.max_value = *it;
  p.max_time = p.times[static_cast<std::size_t>(it - p.pair_fraction.begin())];
  p.interior_maximum = find_interior_maximum(p.pair_fraction, 1e-3) >= 0;
  return p;
}

}  // namespace twinfock
