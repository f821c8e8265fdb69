#include "twinfock/spinor.hpp"

#include "twinfock/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace twinfock {

void ModelParams::validate() const {
  if (n_atoms < 2)
    throw std::invalid_argument("n_atoms must be >= 2, got " + std::to_string(n_atoms));
  if (!std::isfinite(omega) || !std::isfinite(q))
    throw std::invalid_argument("omega and q must be finite");
}

double ModelParams::q_over_omega() const {
  if (omega == 0.0) throw std::invalid_argument("q/|omega| undefined for omega == 0");
  return q / std::abs(omega);
}

PairBasis::PairBasis(int n_atoms) : n_atoms_(n_atoms) {
  if (n_atoms < 2)
    throw std::invalid_argument("n_atoms must be >= 2, got " + std::to_string(n_atoms));
  dimension_ = static_cast<std::size_t>(n_atoms / 2) + 1;
  pair_weights_.resize(dimension_);
  for (std::size_t k = 0; k < dimension_; ++k)
    pair_weights_[k] = 2.0 * static_cast<double>(k) / n_atoms;
}

std::array<int, 3> PairBasis::occupations(std::size_t k) const {
  const int kk = static_cast<int>(k);
  return {kk, n_atoms_ - 2 * kk, kk};
}

SpinorState::SpinorState(PairBasis basis)
    : basis_(basis), amplitudes_(basis.dimension(), cplx{0.0, 0.0}) {
  amplitudes_[0] = 1.0;
}

SpinorState::SpinorState(PairBasis basis, std::vector<cplx> amplitudes)
    : basis_(basis), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != basis_.dimension())
    throw std::invalid_argument("amplitude vector does not match basis dimension");
}

SpinorState SpinorState::fock(const PairBasis& basis, std::size_t k) {
  if (k >= basis.dimension()) throw std::invalid_argument("Fock index outside pair basis");
  std::vector<cplx> a(basis.dimension(), cplx{0.0, 0.0});
  a[k] = 1.0;
  return SpinorState(basis, std::move(a));
}

SpinorState SpinorState::projected_product(const PairBasis& basis,
                                           std::array<cplx, 3> sp) {
  // c_k = sqrt(N! / (k!^2 (N-2k)!)) (c_-1 c_+1)^k c_0^(N-2k), built in log space.
  const int n = basis.n_atoms();
  const cplx pair = sp[0] * sp[2];
  const double log_pair = std::log(std::abs(pair));
  const double log_zero = std::log(std::abs(sp[1]));
  const double phase_pair = std::arg(pair);
  const double phase_zero = std::arg(sp[1]);
  const std::size_t dim = basis.dimension();
  std::vector<double> logmag(dim, -INFINITY);
  for (std::size_t k = 0; k < dim; ++k) {
    const int kk = static_cast<int>(k);
    const int n0 = n - 2 * kk;
    if ((kk > 0 && std::abs(pair) == 0.0) || (n0 > 0 && std::abs(sp[1]) == 0.0)) continue;
    double lm = 0.5 * (std::lgamma(n + 1.0) - 2.0 * std::lgamma(kk + 1.0) - std::lgamma(n0 + 1.0));
    if (kk > 0) lm += kk * log_pair;
    if (n0 > 0) lm += n0 * log_zero;
    logmag[k] = lm;
  }
  const double peak = *std::max_element(logmag.begin(), logmag.end());
  if (!std::isfinite(peak)) throw std::invalid_argument("product state has no weight in the pair basis");
  std::vector<cplx> a(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    if (!std::isfinite(logmag[k])) continue;
    const int kk = static_cast<int>(k);
    const double phase = kk * phase_pair + (n - 2 * kk) * phase_zero;
    a[k] = std::polar(std::exp(logmag[k] - peak), phase);
  }
  SpinorState s(basis, std::move(a));
  s.normalize();
  return s;
}

SpinorState SpinorState::rotated_polar(const PairBasis& basis, double beta) {
  // d^1_{m0}(beta): (sin/sqrt2, cos, -sin/sqrt2) for m = -1, 0, +1
  const double s = std::sin(beta) / std::sqrt(2.0);
  return projected_product(basis, {cplx{s, 0.0}, cplx{std::cos(beta), 0.0}, cplx{-s, 0.0}});
}

double SpinorState::norm() const { return std::sqrt(kernels::norm_sq(amplitudes_)); }

void SpinorState::normalize() {
  const double nrm = norm();
  if (nrm == 0.0 || !std::isfinite(nrm)) throw NumericalError("cannot normalize a zero or non-finite state");
  for (auto& a : amplitudes_) a /= nrm;
}

void SpinorState::require_normalized(double tol) const {
  const double n2 = kernels::norm_sq(amplitudes_);
  if (std::abs(n2 - 1.0) > tol)
    throw std::invalid_argument("state is not normalized (|psi|^2 = " + std::to_string(n2) + ")");
}

double SpinorState::fidelity(const SpinorState& other) const {
  if (!(basis_ == other.basis_)) throw std::invalid_argument("fidelity between different bases");
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < amplitudes_.size(); ++k) s += std::conj(amplitudes_[k]) * other.amplitudes_[k];
  return std::norm(s);
}

SpinorState SpinorState::conjugated() const {
  std::vector<cplx> a(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), a.begin(), [](cplx c) { return std::conj(c); });
  return SpinorState(basis_, std::move(a));
}

void TridiagonalOperator::apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
  y.resize(x.size());
  kernels::tridiag_apply(diagonal, off_diagonal, x, y);
}

double TridiagonalOperator::expectation(const SpinorState& psi) const {
  std::vector<cplx> hx;
  apply(psi.amplitudes(), hx);
  return kernels::real_dot(psi.amplitudes(), hx);
}

std::pair<double, double> TridiagonalOperator::spectral_bounds() const {
  const std::size_t n = diagonal.size();
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    double r = 0.0;
    if (k > 0) r += std::abs(off_diagonal[k - 1]);
    if (k + 1 < n) r += std::abs(off_diagonal[k]);
    lo = std::min(lo, diagonal[k] - r);
    hi = std::max(hi, diagonal[k] + r);
  }
  return {lo, hi};
}

Eigen::MatrixXd TridiagonalOperator::dense() const {
  const auto n = static_cast<Eigen::Index>(diagonal.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = diagonal[k];
  for (Eigen::Index k = 0; k + 1 < n; ++k) m(k + 1, k) = m(k, k + 1) = off_diagonal[k];
  return m;
}

TridiagonalOperator build_hamiltonian(const ModelParams& params) {
  params.validate();
  const PairBasis basis(params.n_atoms);
  const double n = params.n_atoms;
  const double g = params.omega / (2.0 * n);
  TridiagonalOperator op;
  op.diagonal.resize(basis.dimension());
  op.off_diagonal.resize(basis.dimension() - 1);
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const double kk = static_cast<double>(k);
    const double n0 = n - 2.0 * kk;
    op.diagonal[k] = g * (2.0 * n0 - 1.0) * (2.0 * kk) + params.q * 2.0 * kk;
  }
  // <k+1| 2 g a+^dag a-^dag a0 a0 |k> = 2 g (k+1) sqrt(n0 (n0 - 1))
  for (std::size_t k = 0; k + 1 < basis.dimension(); ++k) {
    const double kk = static_cast<double>(k);
    const double n0 = n - 2.0 * kk;
    op.off_diagonal[k] = 2.0 * g * (kk + 1.0) * std::sqrt(n0 * (n0 - 1.0));
  }
  return op;
}

namespace {

using Fock = std::array<int, 3>;  // modes: 0 -> m=-1, 1 -> m=0, 2 -> m=+1

struct Ladder {
  int mode;
  bool create;
};

// Applies a product of ladder operators right-to-left; returns the
// amplitude (zero if annihilated).
double apply_ladders(Fock& s, std::initializer_list<Ladder> ops_left_to_right) {
  std::vector<Ladder> ops(ops_left_to_right);
  double amp = 1.0;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    int& n = s[static_cast<std::size_t>(it->mode)];
    if (it->create) {
      amp *= std::sqrt(n + 1.0);
      ++n;
    } else {
      if (n == 0) return 0.0;
      amp *= std::sqrt(static_cast<double>(n));
      --n;
    }
  }
  return amp;
}

}  // namespace

DenseOracle dense_oracle(const ModelParams& params) {
  params.validate();
  if (params.n_atoms > 12) throw std::invalid_argument("dense oracle is limited to n_atoms <= 12");
  const int n = params.n_atoms;
  DenseOracle out;
  out.n_atoms = n;
  std::map<Fock, Eigen::Index> index;
  for (int nm = 0; nm <= n; ++nm)
    for (int n0 = 0; nm + n0 <= n; ++n0) {
      const Fock s{nm, n0, n - nm - n0};
      index[s] = static_cast<Eigen::Index>(out.states.size());
      out.states.push_back(s);
    }
  const auto dim = static_cast<Eigen::Index>(out.states.size());
  out.hamiltonian = Eigen::MatrixXd::Zero(dim, dim);
  out.magnetization.resize(dim);
  const double g = params.omega / (2.0 * n);

  auto add = [&](Eigen::Index col, Fock s, double coeff, std::initializer_list<Ladder> ops) {
    const double amp = apply_ladders(s, ops);
    if (amp == 0.0) return;
    out.hamiltonian(index.at(s), col) += coeff * amp;
  };

  for (Eigen::Index c = 0; c < dim; ++c) {
    const Fock s = out.states[static_cast<std::size_t>(c)];
    out.magnetization(c) = s[2] - s[0];
    // spin-changing collisions: 2 g (a0^dag a0^dag a+ a- + a+^dag a-^dag a0 a0)
    add(c, s, 2.0 * g, {{1, true}, {1, true}, {2, false}, {0, false}});
    add(c, s, 2.0 * g, {{2, true}, {0, true}, {1, false}, {1, false}});
    // spin-preserving collisions and level energy, diagonal
    const double side = s[0] + s[2];
    out.hamiltonian(c, c) += g * (2.0 * s[1] - 1.0) * side + params.q * side;
  }
  return out;
}

Eigen::MatrixXd DenseOracle::restricted() const {
  std::vector<Eigen::Index> rows;
  for (int k = 0; 2 * k <= n_atoms; ++k) {
    const Fock target{k, n_atoms - 2 * k, k};
    const auto it = std::find(states.begin(), states.end(), target);
    rows.push_back(static_cast<Eigen::Index>(it - states.begin()));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = hamiltonian(rows[i], rows[j]);
  return m;
}

double DenseOracle::commutator_with_magnetization() const {
  const Eigen::MatrixXd m = magnetization.asDiagonal();
  return (hamiltonian * m - m * hamiltonian).cwiseAbs().maxCoeff();
}

Observables observables(const SpinorState& state) {
  state.require_normalized();
  Observables o;
  o.pair_distribution.resize(state.dimension());
  const auto& w = state.basis().pair_weights();
  for (std::size_t k = 0; k < state.dimension(); ++k) {
    o.pair_distribution[k] = std::norm(state.amplitudes()[k]);
    o.pair_fraction += o.pair_distribution[k] * w[k];
  }
  return o;
}

double pair_fraction(const SpinorState& state) {
  return kernels::weighted_norm_sq(state.basis().pair_weights(), state.amplitudes());
}

}  // namespace twinfock
