#pragma once

#include "twinfock/spinor.hpp"

#include <vector>

namespace twinfock {

struct KrylovOptions {
  double tolerance = 1e-13;      // per-substep error estimate bound
  int max_dimension = 48;
  double max_phase = 12.0;       // radians of spectral spread per substep
  bool operator==(const KrylovOptions&) const = default;
};

// Short-time Lanczos propagator for psi <- exp(-i 2 pi tau H) psi with H a
// real symmetric tridiagonal operator in Hz. The spectrum is centred on the
// Gershgorin midpoint before expanding; the removed global phase is put
// back exactly. Owns its workspace, so one instance per trajectory.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(KrylovOptions options = {}) : options_(options) {}

  void propagate(const TridiagonalOperator& h, std::vector<cplx>& psi, double tau);

  const KrylovOptions& options() const { return options_; }
  long matvec_count() const { return matvecs_; }

 private:
  // One Krylov step of length <= tau; returns the time actually advanced.
  double substep(const TridiagonalOperator& h, std::vector<cplx>& psi, double tau,
                 double shift);

  KrylovOptions options_;
  std::vector<std::vector<cplx>> basis_;
  std::vector<double> alpha_, beta_;
  std::vector<double> shifted_diag_;
  long matvecs_ = 0;
};

}  // namespace twinfock
