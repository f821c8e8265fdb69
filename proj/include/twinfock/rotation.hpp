#pragma once

// Outcome statistics of J_z after a symmetric pi/2 coupling of the two
// m = +-1 modes. A pair sector with k atoms per mode is the collective
// spin state |j = k, m = 0>.

#include "twinfock/krylov.hpp"
#include "twinfock/spinor.hpp"

#include <span>
#include <vector>

namespace twinfock {

// P(m) = |d^j_{m0}(pi/2)|^2 for m = -j..j (index m + j), from the two-term
// recursion of the rotation-matrix column. Entries with j + m odd vanish.
std::vector<double> pi2_distribution(int j);
// Same column, unnormalized (largest entries O(sqrt j) relative to the centre).
void pi2_weights(int j, std::vector<double>& weights);

// Phase-averaged outcome distribution for a general sector state with
// amplitudes b_m (index m + j, size 2j + 1). The random azimuthal phase
// removes coherences between different m before the rotation.
std::vector<double> pi2_distribution(std::span<const cplx> sector_amplitudes,
                                     const KrylovOptions& options = {});

// Real symmetric form of J_y for spin j, obtained by the diagonal gauge
// i^m; exp(-i theta J_y) and exp(-i theta J) have equal moduli.
TridiagonalOperator gauge_jy(int j);

struct RotatedSector {
  int k = 0;
  double weight = 0.0;               // |c_k|^2
  std::vector<double> probability;  // index m + k
};

// Every sector with weight above `min_weight`.
std::vector<RotatedSector> rotate_pi2_distribution(const SpinorState& state, double min_weight = 0.0);

double second_moment(std::span<const double> probability);  // sum m^2 P(m), index m + j

}  // namespace twinfock
