#include "twinfock/krylov.hpp"

#include "twinfock/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace twinfock {

namespace {

// y = exp(-i theta T) e1 for the leading m x m block of the Lanczos matrix.
Eigen::VectorXcd krylov_exponential(const std::vector<double>& alpha,
                                    const std::vector<double>& beta, int m, double theta) {
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) d(i) = alpha[static_cast<std::size_t>(i)];
  if (m == 1) {
    Eigen::VectorXcd y(1);
    y(0) = std::polar(1.0, -theta * d(0));
    return y;
  }
  Eigen::VectorXd e(m - 1);
  for (int i = 0; i + 1 < m; ++i) e(i) = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("Krylov eigen-decomposition failed");
  const Eigen::MatrixXd& u = es.eigenvectors();
  Eigen::VectorXcd coeff(m);
  for (int l = 0; l < m; ++l) coeff(l) = u(0, l) * std::polar(1.0, -theta * es.eigenvalues()(l));
  return u.cast<cplx>() * coeff;
}

}  // namespace

void KrylovPropagator::propagate(const TridiagonalOperator& h, std::vector<cplx>& psi,
                                 double tau) {
  if (psi.size() != h.dimension()) throw std::invalid_argument("state and operator dimensions differ");
  if (tau == 0.0) return;
  const auto [lo, hi] = h.spectral_bounds();
  const double shift = 0.5 * (lo + hi);
  shifted_diag_.resize(h.dimension());
  for (std::size_t k = 0; k < h.dimension(); ++k) shifted_diag_[k] = h.diagonal[k] - shift;
  const double radius = std::max(0.5 * (hi - lo), 1e-300);
  const double max_tau = options_.max_phase / (2.0 * std::numbers::pi * radius);

  double remaining = std::abs(tau);
  const double sign = tau > 0 ? 1.0 : -1.0;
  while (remaining > 0.0) {
    const double want = std::min(remaining, max_tau);
    const double done = substep(h, psi, sign * want, shift);
    remaining -= done;
    if (remaining < 1e-15 * std::abs(tau)) break;
  }
}

double KrylovPropagator::substep(const TridiagonalOperator& h, std::vector<cplx>& psi,
                                 double tau, double shift) {
  const std::size_t n = psi.size();
  const int mmax = std::max(1, std::min<int>(options_.max_dimension, static_cast<int>(n)));
  if (basis_.size() < static_cast<std::size_t>(mmax) + 1) basis_.resize(static_cast<std::size_t>(mmax) + 1);
  for (auto& v : basis_) v.resize(n);
  alpha_.assign(static_cast<std::size_t>(mmax), 0.0);
  beta_.assign(static_cast<std::size_t>(mmax), 0.0);

  const double beta0 = std::sqrt(kernels::norm_sq(psi));
  if (beta0 == 0.0) return std::abs(tau);
  for (std::size_t k = 0; k < n; ++k) basis_[0][k] = psi[k] / beta0;

  const double two_pi = 2.0 * std::numbers::pi;
  double theta = two_pi * tau;
  // The small exponential carries roundoff of order eps in every entry, so
  // the estimate cannot drop below about eps * beta.
  const auto accept = [&](double b) {
    return options_.tolerance + 64.0 * std::numeric_limits<double>::epsilon() * b;
  };
  int m = 0;
  Eigen::VectorXcd y;
  bool converged = false;
  for (int j = 0; j < mmax; ++j) {
    auto& w = basis_[static_cast<std::size_t>(j) + 1];
    const auto& v = basis_[static_cast<std::size_t>(j)];
    kernels::tridiag_apply(shifted_diag_, h.off_diagonal, v, w);
    ++matvecs_;
    const double a = kernels::real_dot(v, w);
    alpha_[static_cast<std::size_t>(j)] = a;
    kernels::axpy_real(-a, v, w);
    if (j > 0) kernels::axpy_real(-beta_[static_cast<std::size_t>(j) - 1], basis_[static_cast<std::size_t>(j) - 1], w);
    const double b = std::sqrt(kernels::norm_sq(w));
    beta_[static_cast<std::size_t>(j)] = b;
    m = j + 1;
    const bool invariant = b < 1e-14 * (std::abs(a) + 1.0);
    const bool checkpoint = invariant || m == mmax || (m >= 6 && m % 6 == 0);
    if (checkpoint) {
      y = krylov_exponential(alpha_, beta_, m, theta);
      const double err = invariant ? 0.0 : b * std::abs(y(m - 1));
      if (err <= accept(b)) {
        converged = true;
        break;
      }
    }
    if (!invariant) {
      const double inv = 1.0 / b;
      for (std::size_t k = 0; k < n; ++k) w[k] *= inv;
    }
  }
  // Basis exhausted: shrink the step on the same Krylov space.
  int shrink = 0;
  while (!converged) {
    if (++shrink > 60) throw NumericalError("Krylov propagator failed to reach tolerance");
    tau *= 0.5;
    theta = two_pi * tau;
    y = krylov_exponential(alpha_, beta_, m, theta);
    const double b = beta_[static_cast<std::size_t>(m) - 1];
    converged = b * std::abs(y(m - 1)) <= accept(b);
  }

  const cplx phase = std::polar(beta0, -two_pi * shift * tau);
  std::fill(psi.begin(), psi.end(), cplx{0.0, 0.0});
  for (int l = 0; l < m; ++l) kernels::axpy_complex(phase * y(l), basis_[static_cast<std::size_t>(l)], psi);
  return std::abs(tau);
}

}  // namespace twinfock
