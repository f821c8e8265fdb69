#include "twinfock/kinematics.hpp"

#include "twinfock/parallel.hpp"
#include "twinfock/spinor.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace twinfock {

namespace odeint = boost::numeric::odeint;

double geometric_mean(const Vec3& v) { return std::cbrt(v[0] * v[1] * v[2]); }

void TrapConfig::validate() const {
  for (double f : frequencies)
    if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("trap frequencies must be positive");
  double last = 0.0;
  for (const auto& fl : flashes) {
    if (!(fl.t_start >= last) || !(fl.t_end > fl.t_start))
      throw std::invalid_argument("flash intervals must be ordered, disjoint and non-empty");
    last = fl.t_end;
  }
}

TrapConfig TrapConfig::with_flash(double t_start, double duration) const {
  TrapConfig t = *this;
  t.flashes.clear();
  if (duration > 0.0) t.flashes.push_back({t_start, t_start + duration});
  return t;
}

namespace {

using OdeState = std::array<double, 6>;  // lambda, lambda_dot

struct ScalingRhs {
  Vec3 w2;
  bool trap_on;
  void operator()(const OdeState& y, OdeState& dy, double) const {
    const double prod = y[0] * y[1] * y[2];
    for (int j = 0; j < 3; ++j) {
      dy[j] = y[3 + j];
      dy[3 + j] = w2[j] / (y[j] * prod) - (trap_on ? w2[j] * y[j] : 0.0);
    }
  }
};

class Integrator {
 public:
  Integrator(const TrapConfig& trap, const OdeTolerances& tol) : trap_(trap), tol_(tol) {
    trap.validate();
    for (int j = 0; j < 3; ++j) {
      const double w = 2.0 * std::numbers::pi * trap.frequencies[j];
      w2_[j] = w * w;
    }
    y_ = {1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
  }

  // Advances to t, splitting at flash edges so the integrator never steps
  // across a discontinuity of the force.
  void advance(double t) {
    while (t_ < t) {
      double stop = t;
      bool on = false;
      for (const auto& fl : trap_.flashes) {
        if (t_ < fl.t_start) {
          stop = std::min(stop, fl.t_start);
          break;
        }
        if (t_ < fl.t_end) {
          stop = std::min(stop, fl.t_end);
          on = true;
          break;
        }
      }
      const ScalingRhs rhs{w2_, on};
      const double dt0 = std::min(1e-6, stop - t_);
      try {
        odeint::integrate_adaptive(
            odeint::make_controlled(tol_.absolute, tol_.relative, odeint::runge_kutta_dopri5<OdeState>()),
            rhs, y_, t_, stop, dt0);
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "scaling ODE failed after t = " << t_ << " s: " << e.what();
        throw NumericalError(msg.str());
      }
      for (int j = 0; j < 3; ++j)
        if (!(y_[j] >= 1e-6) || !std::isfinite(y_[3 + j])) {
          std::ostringstream msg;
          msg << "scaling ODE left the physical range near t = " << stop << " s (last good t = " << t_ << " s)";
          throw NumericalError(msg.str());
        }
      t_ = stop;
    }
  }

  ExpansionState state() const {
    return ExpansionState{t_, {y_[0], y_[1], y_[2]}, {y_[3], y_[4], y_[5]}};
  }

 private:
  TrapConfig trap_;
  OdeTolerances tol_;
  Vec3 w2_{};
  OdeState y_{};
  double t_ = 0.0;
};

double refine_min(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  if (i == 0 || i + 1 >= x.size()) return x[i];
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  if (!(a > 0.0)) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

}  // namespace

std::vector<ExpansionState> scaling_expansion(const TrapConfig& trap, std::span<const double> t_grid,
                                              const OdeTolerances& tol) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw std::invalid_argument("time grid must be sorted");
  if (!t_grid.empty() && t_grid.front() < 0.0) throw std::invalid_argument("time grid starts before release");
  Integrator integ(trap, tol);
  std::vector<ExpansionState> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    integ.advance(t);
    out.push_back(integ.state());
  }
  return out;
}

ExpansionState expansion_at(const TrapConfig& trap, double t, const OdeTolerances& tol) {
  const double g[1] = {t};
  return scaling_expansion(trap, g, tol).front();
}

Vec3 initial_sizes(const TrapConfig& trap, double sigma0_ref) {
  trap.validate();
  const double wbar = geometric_mean(trap.frequencies);
  Vec3 s;
  for (int j = 0; j < 3; ++j) s[j] = sigma0_ref * wbar / trap.frequencies[j];
  return s;
}

Vec3 asymptotic_rates(const TrapConfig& trap, double horizon) {
  return expansion_at(trap, horizon).lambda_dot;
}

double calibrate_sigma0(const TrapConfig& trap, double target_velocity) {
  if (!(target_velocity > 0.0)) throw std::invalid_argument("target velocity must be positive");
  const Vec3 rates = asymptotic_rates(trap);
  const Vec3 unit = initial_sizes(trap, 1.0);
  return target_velocity / geometric_mean({rates[0] * unit[0], rates[1] * unit[1], rates[2] * unit[2]});
}

double Cloud::size_at(double t) const {
  const ExpansionState s = expansion_at(trap, t);
  return geometric_mean({s.lambda[0] * sigma0[0], s.lambda[1] * sigma0[1], s.lambda[2] * sigma0[2]});
}

Vec3 Cloud::velocity_at(double t) const {
  const ExpansionState s = expansion_at(trap, t);
  return {s.lambda_dot[0] * sigma0[0], s.lambda_dot[1] * sigma0[1], s.lambda_dot[2] * sigma0[2]};
}

double Cloud::asymptotic_velocity(double horizon) const {
  const Vec3 v = velocity_at(horizon);
  for (double x : v)
    if (x < 0.0) return -geometric_mean({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  return geometric_mean(v);
}

CollimationScan collimation_scan(const Cloud& free_cloud, double flash_start,
                                 std::span<const double> tau_grid, double probe_time, int workers,
                                 double lens_slope_fraction) {
  if (tau_grid.size() < 3) throw std::invalid_argument("collimation scan needs at least three taus");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end()) || tau_grid.front() < 0.0)
    throw std::invalid_argument("tau grid must be sorted and non-negative");
  if (!(probe_time > flash_start + tau_grid.back()))
    throw std::invalid_argument("probe time must follow the longest flash");
  CollimationScan scan;
  scan.tau.assign(tau_grid.begin(), tau_grid.end());
  scan.probe_time = probe_time;
  scan.flash_start = flash_start;
  const std::size_t n = scan.tau.size();
  scan.size.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    Cloud c{free_cloud.trap.with_flash(flash_start, scan.tau[i]), free_cloud.sigma0};
    const ExpansionState s = expansion_at(c.trap, probe_time);
    scan.size[i] = geometric_mean({s.lambda[0] * c.sigma0[0], s.lambda[1] * c.sigma0[1], s.lambda[2] * c.sigma0[2]});
  });
  const auto imin = static_cast<std::size_t>(std::min_element(scan.size.begin(), scan.size.end()) - scan.size.begin());
  scan.interior_minimum = imin > 0 && imin + 1 < n;
  scan.minimum_tau = refine_min(scan.tau, scan.size, imin);
  scan.minimum_size = scan.size[imin];
  const double slope0 = (scan.size[1] - scan.size[0]) / (scan.tau[1] - scan.tau[0]);
  scan.operating_tau = scan.tau[0];
  for (std::size_t i = 1; i <= imin; ++i) {
    const double slope = (scan.size[i] - scan.size[i - 1]) / (scan.tau[i] - scan.tau[i - 1]);
    if (slope > lens_slope_fraction * slope0) break;
    scan.operating_tau = scan.tau[i];
  }
  const double v_free = free_cloud.asymptotic_velocity();
  Cloud op{free_cloud.trap.with_flash(flash_start, scan.operating_tau), free_cloud.sigma0};
  scan.operating_reduction = 1.0 - op.asymptotic_velocity() / v_free;
  return scan;
}

double tau_for_reduction(const Cloud& free_cloud, double flash_start, double reduction,
                         double tau_max) {
  if (!(reduction > 0.0 && reduction < 1.0)) throw std::invalid_argument("reduction must lie in (0, 1)");
  const double v_free = free_cloud.asymptotic_velocity();
  auto achieved = [&](double tau) {
    Cloud c{free_cloud.trap.with_flash(flash_start, tau), free_cloud.sigma0};
    return 1.0 - c.asymptotic_velocity() / v_free;
  };
  double lo = 0.0, hi = tau_max;
  if (achieved(hi) < reduction) throw std::invalid_argument("reduction not reachable below tau_max");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (achieved(mid) < reduction) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double PixelModel::pixels(double size) const {
  if (!(size > 0.0) || !(pixel_scale > 0.0) || !(coverage > 0.0))
    throw std::invalid_argument("pixel model needs positive size, pixel scale and coverage");
  const double side = size * coverage / pixel_scale;
  return ceil_pixels ? std::pow(std::ceil(side), 2) : side * side;
}

double PixelModel::noise_db(double size) const {
  if (!(per_pixel_noise > 0.0) || !(n_atoms > 0.0))
    throw std::invalid_argument("pixel model needs positive per-pixel noise and atom number");
  const double mode_var = pixels(size) * per_pixel_noise * per_pixel_noise;
  const double var_jz = 2.0 * mode_var / 4.0;
  return 10.0 * std::log10(4.0 * var_jz / n_atoms);
}

double PixelModel::zero_db_size() const {
  // 2 n_pix sigma_p^2 / N = 1
  return pixel_scale / coverage * std::sqrt(n_atoms / (2.0 * per_pixel_noise * per_pixel_noise));
}

double detection_noise_model(double cloud_size, const PixelModel& model) { return model.noise_db(cloud_size); }

PixelModel calibrate_per_pixel_noise(PixelModel model, double size, double target_db) {
  model.per_pixel_noise = 1.0;
  const double at_unit = model.noise_db(size);
  // noise_db is 20 log10(per_pixel_noise) + const
  model.per_pixel_noise = std::pow(10.0, (target_db - at_unit) / 20.0);
  return model;
}

std::vector<NoiseCurve> noise_extrapolation(std::span<const ExpansionSetting> settings,
                                            std::span<const double> t_grid, const PixelModel& model) {
  std::vector<NoiseCurve> out;
  const double s_star = model.zero_db_size();
  for (const auto& st : settings) {
    if (!(st.size0 > 0.0) || !(st.velocity >= 0.0))
      throw std::invalid_argument("expansion setting needs size0 > 0 and velocity >= 0");
    NoiseCurve c;
    c.name = st.name;
    for (double t : t_grid) {
      const double s = std::hypot(st.size0, st.velocity * t);
      c.t.push_back(t);
      c.size.push_back(s);
      c.noise_db.push_back(model.noise_db(s));
    }
    if (st.size0 >= s_star) c.zero_db_time = 0.0;
    else if (st.velocity == 0.0) c.zero_db_time = std::numeric_limits<double>::infinity();
    else c.zero_db_time = std::sqrt(s_star * s_star - st.size0 * st.size0) / st.velocity;
    out.push_back(std::move(c));
  }
  return out;
}

Temperatures effective_temperatures(double sigma_v, const Constants& c) {
  const double full = c.mass * sigma_v * sigma_v / c.k_boltzmann;
  return {full, 0.5 * full};
}

}  // namespace twinfock
