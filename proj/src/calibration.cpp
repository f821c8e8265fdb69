#include "twinfock/calibration.hpp"

#include "twinfock/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace twinfock {

void DressingModel::validate() const {
  if (!std::isfinite(q_zeeman) || !std::isfinite(kappa) || !std::isfinite(kappa2))
    throw std::invalid_argument("dressing model coefficients must be finite");
  // dq/dP = -kappa - 2 kappa2 P is linear, so checking both ends suffices.
  if (!(kappa > 0.0) || !(kappa + 2.0 * kappa2 > 0.0))
    throw std::invalid_argument("dressing model must be strictly decreasing on [0, 1]");
}

double DressingModel::power_for(double q_target) const {
  validate();
  if (q_target > q(0.0) || q_target < q(1.0)) {
    std::ostringstream msg;
    msg << "q = " << q_target << " Hz is outside the dressing range [" << q(1.0) << ", " << q(0.0) << "]";
    throw std::out_of_range(msg.str());
  }
  if (kappa2 == 0.0) return (q_zeeman - q_target) / kappa;
  // kappa2 P^2 + kappa P - (q_zeeman - q_target) = 0, stable root.
  const double c = -(q_zeeman - q_target);
  const double disc = std::sqrt(kappa * kappa - 4.0 * kappa2 * c);
  const double r = -0.5 * (kappa + disc);
  const double p = c / r;
  return std::clamp(p, 0.0, 1.0);
}

double landmark_value(LandmarkKind kind) {
  switch (kind) {
    case LandmarkKind::Plus2: return 2.0;
    case LandmarkKind::Plus1: return 1.0;
    case LandmarkKind::Zero: return 0.0;
    case LandmarkKind::Minus1: return -1.0;
    case LandmarkKind::Minus2: return -2.0;
  }
  return 0.0;
}

std::string to_string(LandmarkKind kind) {
  switch (kind) {
    case LandmarkKind::Plus2: return "+2";
    case LandmarkKind::Plus1: return "+1";
    case LandmarkKind::Zero: return "0";
    case LandmarkKind::Minus1: return "-1";
    case LandmarkKind::Minus2: return "-2";
  }
  return "?";
}

LandmarkKind landmark_from_value(int value) {
  switch (value) {
    case 2: return LandmarkKind::Plus2;
    case 1: return LandmarkKind::Plus1;
    case 0: return LandmarkKind::Zero;
    case -1: return LandmarkKind::Minus1;
    case -2: return LandmarkKind::Minus2;
    default: throw std::invalid_argument("landmark must be one of +2, +1, 0, -1, -2");
  }
}

LandmarkProtocol default_protocol(LandmarkKind kind) {
  switch (kind) {
    case LandmarkKind::Plus2: return {kind, Recipe::PolarStart, 0.090, std::nullopt};
    case LandmarkKind::Plus1: return {kind, Recipe::PolarStart, 0.110, std::nullopt};
    case LandmarkKind::Zero: return {kind, Recipe::RotatedStart, 0.060, std::nullopt};
    case LandmarkKind::Minus1: return {kind, Recipe::TwinFockStart, 0.110, std::nullopt};
    case LandmarkKind::Minus2: return {kind, Recipe::TwinFockStart, 0.090, std::nullopt};
  }
  throw std::invalid_argument("unknown landmark");
}

double seed_threshold(const LandmarkProtocol& protocol, const ModelParams& params) {
  // At |q| = 2|omega| the pair amplitude grows linearly, not exponentially:
  // two seeded modes from the polar state, one from the twin-Fock state.
  const double x = 2.0 * std::numbers::pi * std::abs(params.omega) * protocol.duration;
  switch (protocol.recipe) {
    case Recipe::PolarStart: return 2.0 * x * x / params.n_atoms;
    case Recipe::TwinFockStart: return x * x / params.n_atoms;
    case Recipe::RotatedStart: break;
  }
  throw std::invalid_argument("seed threshold is defined for polar and twin-Fock starts only");
}

SpinorState recipe_state(Recipe recipe, const PairBasis& basis) {
  switch (recipe) {
    case Recipe::PolarStart: return SpinorState::fock(basis, 0);
    case Recipe::TwinFockStart: return SpinorState::fock(basis, basis.dimension() - 1);
    case Recipe::RotatedStart: return SpinorState::rotated_polar(basis, std::numbers::pi / 4.0);
  }
  throw std::invalid_argument("unknown recipe");
}

namespace {

double crossing(double x0, double y0, double x1, double y1, double level) {
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

[[noreturn]] void out_of_range(const LandmarkProtocol& p, const std::string& why) {
  throw LandmarkOutOfRange("landmark " + to_string(p.kind) + " out of range: " + why);
}

double locate_threshold(const LandmarkCurve& c) {
  const auto& x = c.power;
  const auto& y = c.transfer;
  const double level = c.criterion_level;
  const std::size_t n = x.size();
  if (c.protocol.recipe == Recipe::PolarStart) {
    if (y[0] >= level) out_of_range(c.protocol, "transfer already above threshold at the first power");
    for (std::size_t i = 1; i < n; ++i)
      if (y[i] >= level) return crossing(x[i - 1], y[i - 1], x[i], y[i], level);
    out_of_range(c.protocol, "transfer never reaches the threshold");
  }
  if (y[n - 1] >= level) out_of_range(c.protocol, "transfer still above threshold at the last power");
  for (std::size_t i = n - 1; i-- > 0;)
    if (y[i] >= level) return crossing(x[i], y[i], x[i + 1], y[i + 1], level);
  out_of_range(c.protocol, "transfer never reaches the threshold");
}

double locate_maximum(const LandmarkCurve& c) {
  const auto& x = c.power;
  const auto& y = c.transfer;
  const auto i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (i == 0 || i + 1 == y.size()) out_of_range(c.protocol, "transfer maximum lies on the grid edge");
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  if (!(a < 0.0)) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

double locate_zero(const LandmarkCurve& c) {
  // Net transfer is positive for q > 0 and reverses below; take the
  // steepest + to - sign change.
  const auto& x = c.power;
  std::vector<double> net(c.pair_fraction.size());
  for (std::size_t i = 0; i < net.size(); ++i) net[i] = c.pair_fraction[i] - c.initial_pair_fraction;
  double best = -1.0, at = 0.0;
  for (std::size_t i = 0; i + 1 < net.size(); ++i) {
    if (net[i] > 0.0 && net[i + 1] <= 0.0) {
      const double jump = net[i] - net[i + 1];
      if (jump > best) {
        best = jump;
        at = net[i + 1] == 0.0 ? x[i + 1] : crossing(x[i], net[i], x[i + 1], net[i + 1], 0.0);
      }
    }
  }
  if (best < 0.0) out_of_range(c.protocol, "net transfer never changes sign");
  return at;
}

}  // namespace

LandmarkCurve simulate_landmark(const LandmarkProtocol& protocol, const ModelParams& params,
                                const DressingModel& dressing, std::span<const double> power_grid,
                                int workers, const KrylovOptions& krylov) {
  params.validate();
  dressing.validate();
  if (!(protocol.duration > 0.0)) throw std::invalid_argument("landmark duration must be positive");
  if (power_grid.size() < 3) throw std::invalid_argument("power grid needs at least three points");
  for (std::size_t i = 0; i < power_grid.size(); ++i) {
    if (power_grid[i] < 0.0 || power_grid[i] > 1.0) throw std::invalid_argument("powers must lie in [0, 1]");
    if (i > 0 && !(power_grid[i] > power_grid[i - 1])) throw std::invalid_argument("power grid must be strictly increasing");
  }
  const bool onset = protocol.kind == LandmarkKind::Plus2 || protocol.kind == LandmarkKind::Minus2;
  const bool zero = protocol.kind == LandmarkKind::Zero;
  if (onset && protocol.recipe == Recipe::RotatedStart)
    throw std::invalid_argument("threshold landmarks need a polar or twin-Fock start");

  const PairBasis basis(params.n_atoms);
  const SpinorState initial = recipe_state(protocol.recipe, basis);
  LandmarkCurve c;
  c.protocol = protocol;
  c.power.assign(power_grid.begin(), power_grid.end());
  const std::size_t n = c.power.size();
  c.q_over_omega.resize(n);
  c.pair_fraction.resize(n);
  c.transfer.resize(n);
  c.initial_pair_fraction = pair_fraction(initial);
  parallel_for(n, workers, [&](std::size_t i) {
    const double q = dressing.q(c.power[i]);
    c.q_over_omega[i] = q / std::abs(params.omega);
    const SpinorState out = evolve_constant(initial, build_hamiltonian(params.with_q(q)), protocol.duration, krylov);
    c.pair_fraction[i] = pair_fraction(out);
  });
  for (std::size_t i = 0; i < n; ++i)
    c.transfer[i] = protocol.recipe == Recipe::TwinFockStart ? 1.0 - c.pair_fraction[i] : c.pair_fraction[i];

  if (onset) {
    c.criterion_level = protocol.threshold ? *protocol.threshold : seed_threshold(protocol, params);
    c.located_power = locate_threshold(c);
  } else if (zero) {
    c.criterion_level = c.initial_pair_fraction;
    c.located_power = locate_zero(c);
  } else {
    c.located_power = locate_maximum(c);
    c.criterion_level = *std::max_element(c.transfer.begin(), c.transfer.end());
  }
  c.located_q_over_omega = dressing.q(c.located_power) / std::abs(params.omega);
  return c;
}

DressingFit fit_dressing_model(std::span<const CalibrationPoint> points, double omega,
                               const FitOptions& options) {
  if (omega == 0.0) throw std::invalid_argument("fit needs omega != 0");
  const int free_q = options.fixed_q_zeeman ? 0 : 1;
  const int cols = free_q + 1 + (options.quadratic ? 1 : 0);
  if (static_cast<int>(points.size()) < cols) {
    std::ostringstream msg;
    msg << "fit needs at least " << cols << " points, got " << points.size();
    throw std::invalid_argument(msg.str());
  }
  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& pt = points[static_cast<std::size_t>(r)];
    if (pt.power < 0.0 || pt.power > 1.0) throw std::invalid_argument("calibration powers must lie in [0, 1]");
    int c = 0;
    if (free_q) a(r, c++) = 1.0;
    a(r, c++) = -pt.power;
    if (options.quadratic) a(r, c++) = -pt.power * pt.power;
    rhs(r) = landmark_value(pt.landmark) * std::abs(omega) - (free_q ? 0.0 : *options.fixed_q_zeeman);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw std::invalid_argument("rank-deficient dressing fit (powers not distinct enough)");
  const Eigen::VectorXd x = qr.solve(rhs);

  DressingFit fit;
  int c = 0;
  fit.model.q_zeeman = free_q ? x(c++) : *options.fixed_q_zeeman;
  fit.model.kappa = x(c++);
  fit.model.kappa2 = options.quadratic ? x(c++) : 0.0;
  double ss = 0.0;
  for (const auto& pt : points) {
    const double r = fit.model.q(pt.power) - landmark_value(pt.landmark) * std::abs(omega);
    fit.residuals.push_back(r);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(points.size()));
  return fit;
}

RampSchedule power_ramp_schedule(const DressingModel& dressing, double p_start, double p_end,
                                 double duration, int pieces) {
  dressing.validate();
  if (pieces < 1) throw std::invalid_argument("power ramp needs at least one piece");
  if (p_start < 0.0 || p_start > 1.0 || p_end < 0.0 || p_end > 1.0)
    throw std::invalid_argument("ramp powers must lie in [0, 1]");
  std::vector<RampSegment> segs;
  segs.reserve(static_cast<std::size_t>(pieces));
  for (int i = 0; i < pieces; ++i) {
    const double u0 = static_cast<double>(i) / pieces, u1 = static_cast<double>(i + 1) / pieces;
    segs.push_back({duration / pieces, dressing.q(p_start + (p_end - p_start) * u0),
                    dressing.q(p_start + (p_end - p_start) * u1)});
  }
  return RampSchedule(std::move(segs));
}

}  // namespace twinfock
