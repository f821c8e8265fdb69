#pragma once

// Single-mode spin-1 Hamiltonian in the zero-magnetization pair basis.
//
// Basis state |k> holds k atoms in each of m = +1 and m = -1 and N - 2k
// atoms in m = 0, so the sector has floor(N/2) + 1 states. All energies
// are frequencies E/h in Hz.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace twinfock {

using cplx = std::complex<double>;

// Raised for numerical failures (non-convergence, integrator breakdown).
// The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelParams {
  int n_atoms = 1000;
  double omega = -3.0;  // interaction strength, Hz (negative: ferromagnetic)
  double q = 0.0;       // per-atom energy of m = +-1 relative to m = 0, Hz

  void validate() const;
  // q/|omega|; throws when omega == 0.
  double q_over_omega() const;
  ModelParams with_q(double new_q) const {
    ModelParams p = *this;
    p.q = new_q;
    return p;
  }
  bool operator==(const ModelParams&) const = default;
};

class PairBasis {
 public:
  explicit PairBasis(int n_atoms);

  int n_atoms() const { return n_atoms_; }
  std::size_t dimension() const { return dimension_; }
  // Populations (n_-1, n_0, n_+1) of basis state k.
  std::array<int, 3> occupations(std::size_t k) const;
  // 2k / N for every basis state.
  const std::vector<double>& pair_weights() const { return pair_weights_; }

  bool operator==(const PairBasis& o) const { return n_atoms_ == o.n_atoms_; }

 private:
  int n_atoms_;
  std::size_t dimension_;
  std::vector<double> pair_weights_;
};

class SpinorState {
 public:
  explicit SpinorState(PairBasis basis);  // |k = 0>
  SpinorState(PairBasis basis, std::vector<cplx> amplitudes);

  static SpinorState fock(const PairBasis& basis, std::size_t k);
  // Pair-basis projection of the product state in which every atom
  // carries single-particle amplitudes (c_-1, c_0, c_+1); renormalized.
  static SpinorState projected_product(const PairBasis& basis,
                                       std::array<cplx, 3> single_particle);
  // Projection of the state obtained by rotating |m = 0> about y by angle
  // beta; beta = pi/4 gives the 25/50/25 population split.
  static SpinorState rotated_polar(const PairBasis& basis, double beta);

  const PairBasis& basis() const { return basis_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  const std::vector<cplx>& amplitudes() const { return amplitudes_; }
  std::vector<cplx>& amplitudes() { return amplitudes_; }

  double norm() const;
  void normalize();
  // Throws std::invalid_argument if | |psi|^2 - 1 | > tol.
  void require_normalized(double tol = 1e-10) const;
  // |<this|other>|^2
  double fidelity(const SpinorState& other) const;
  SpinorState conjugated() const;

 private:
  PairBasis basis_;
  std::vector<cplx> amplitudes_;
};

// Symmetric tridiagonal operator; off_diagonal[k] = <k+1|H|k>.
struct TridiagonalOperator {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;

  std::size_t dimension() const { return diagonal.size(); }
  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const;
  // <psi|H|psi>, Hz
  double expectation(const SpinorState& psi) const;
  // Gershgorin enclosure of the spectrum.
  std::pair<double, double> spectral_bounds() const;
  Eigen::MatrixXd dense() const;
};

TridiagonalOperator build_hamiltonian(const ModelParams& params);

// Full three-mode Fock-space matrix of the same Hamiltonian, every
// magnetization sector included. Test oracle, limited to N <= 12.
struct DenseOracle {
  int n_atoms = 0;
  std::vector<std::array<int, 3>> states;  // (n_-1, n_0, n_+1)
  Eigen::MatrixXd hamiltonian;
  Eigen::VectorXd magnetization;  // n_+1 - n_-1 per state

  // Block on the n_+1 == n_-1 states ordered by k.
  Eigen::MatrixXd restricted() const;
  // max |[H, N_+1 - N_-1]|
  double commutator_with_magnetization() const;
};

DenseOracle dense_oracle(const ModelParams& params);

struct Observables {
  double pair_fraction = 0.0;
  std::vector<double> pair_distribution;
};

Observables observables(const SpinorState& state);
// pair_fraction alone, via the weighted-norm kernel.
double pair_fraction(const SpinorState& state);

}  // namespace twinfock
