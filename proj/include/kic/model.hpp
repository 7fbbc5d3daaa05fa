#pragma once

#include <array>
#include <cmath>

#include "kic/errors.hpp"

namespace kic {

// Kicked Ising chain, one period:
//   U = U_Ising(J) . U_kick(b),          U_Ising = exp(-i J sum_j sz_j sz_{j+1})
//   U_kick = exp(-i sum_j b . sigma_j)
// with periodic boundary conditions and sz eigenvalues +-1.  The symmetrized
// variant splits the kick, U_s = U_kick(b/2) . U_Ising . U_kick(b/2), and has
// the same eigenphases.
struct ModelParams {
  int sites = 2;                       // L
  double coupling = 0.7;               // J
  std::array<double, 3> field{0.9, 0.0, 0.9};  // b

  static ModelParams canonical(int L) {
    ModelParams p;
    p.sites = L;
    return p;
  }

  void validate() const {
    if (sites < 2) throw ArgumentError("ModelParams: need at least 2 sites");
    if (!std::isfinite(coupling) || !std::isfinite(field[0]) || !std::isfinite(field[1]) ||
        !std::isfinite(field[2]))
      throw ArgumentError("ModelParams: non-finite parameter");
  }
};

// A field with b_y != 0 is unitarily equivalent to one rotated into the x-z
// plane (a global rotation about z commutes with U_Ising and with T, R).
// All spectra are computed for the rotated field; `rotated` records whether
// the rotation was non-trivial.
struct EffectiveField {
  std::array<double, 3> value{0.0, 0.0, 0.0};
  bool rotated = false;
};

inline EffectiveField effective_field(const ModelParams& p) {
  EffectiveField e;
  if (p.field[1] == 0.0) {
    e.value = p.field;
    return e;
  }
  e.value = {std::hypot(p.field[0], p.field[1]), 0.0, p.field[2]};
  e.rotated = true;
  return e;
}

}  // namespace kic
