#pragma once

// Physical constants. Every value can be overridden through the config's
// [constants] section; these are the defaults.

namespace twinfock {

struct Constants {
  double hbar = 1.054571817e-34;      // J s, CODATA 2018 (exact via h)
  double k_boltzmann = 1.380649e-23;  // J/K, SI exact
  double mass = 1.443160648e-25;      // kg, 87Rb (86.909180531 u)
  double gravity = 9.81;              // m/s^2, standard rounding
  double wavelength = 780.241e-9;     // m, 87Rb D2 line

  bool operator==(const Constants&) const = default;
};

}  // namespace twinfock
