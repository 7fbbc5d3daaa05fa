#pragma once

// Reflection-adapted momentum bases for the spin-1/2 chain (d = 2).
//
// For each surviving translation orbit with representative |n> and primitive
// period J, the momentum vector in sector k is
//   a = J^{-1/2} sum_{j=0}^{J-1} exp(-2 pi i j k / L) T^j |n>,
// an eigenvector of T with eigenvalue exp(+2 pi i k / L).
//
// The antiunitary K acts on amplitudes as (K psi)(c) = conj(psi(R c)) with R
// the site reversal; it commutes with the Floquet operator for fields in the
// x-z plane, satisfies K^2 = 1, and maps sector k to itself.  A basis of
// K-invariant vectors (u = K u) makes the sector Floquet matrix complex
// symmetric, which is the structure all the statistics below rely on.
//
// Construction per orbit:
//   * achiral orbit (reversal maps the orbit to itself):  u = a + K a, or
//     u = i (a - K a) when the first combination is null; exactly one of the
//     two has healthy norm.
//   * chiral pair (reversal maps the orbit to a different orbit): the pair is
//     processed once, from its smaller representative, and yields the two
//     vectors u1 = a + K a and u2 = i (a - K a), supported on both orbits.
// Amplitudes satisfy u(c) = conj(u(R c)) identically, all basis vectors are
// mutually orthogonal by construction, and the count matches the necklace
// dimension formula.  The residual gauge freedom of a K-invariant unit vector
// is a global sign; it is fixed by the sign of the first amplitude.

#include <cmath>
#include <complex>
#include <vector>

#include "kic/combinatorics.hpp"
#include "kic/errors.hpp"

namespace kic {

struct SparseVector {
  std::vector<u64> codes;  // ascending
  std::vector<std::complex<double>> amps;

  std::size_t support() const { return codes.size(); }
};

struct SectorBasis {
  int L = 0;
  int k = 0;
  std::vector<SparseVector> vectors;

  std::size_t dim() const { return vectors.size(); }
};

namespace detail {

inline SparseVector sorted_by_code(std::vector<std::pair<u64, std::complex<double>>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v;
  v.codes.reserve(entries.size());
  v.amps.reserve(entries.size());
  for (auto& [c, z] : entries) {
    v.codes.push_back(c);
    v.amps.push_back(z);
  }
  return v;
}

inline double norm(const SparseVector& v) {
  double n2 = 0;
  for (auto z : v.amps) n2 += std::norm(z);
  return std::sqrt(n2);
}

// Global sign fixed so the first amplitude has positive real part (positive
// imaginary part when the real part vanishes).  A real factor keeps u = K u.
inline void normalize_and_fix_sign(SparseVector& v) {
  const double n = norm(v);
  if (n < 1e-14) throw ConsistencyError("sector basis: attempted to normalize a null vector");
  double sign = 1.0;
  const std::complex<double> z0 = v.amps.front();
  constexpr double tiny = 1e-12;
  if (z0.real() < -tiny)
    sign = -1.0;
  else if (std::abs(z0.real()) <= tiny && z0.imag() < 0.0)
    sign = -1.0;
  const double f = sign / n;
  for (auto& z : v.amps) z *= f;
}

}  // namespace detail

inline SectorBasis build_sector_basis(int L, int k,
                                      const std::vector<OrbitClass>& orbits) {
  constexpr int d = 2;
  if (L < 2) throw ArgumentError("build_sector_basis: need L >= 2");
  SectorBasis basis;
  basis.L = L;
  basis.k = ((k % L) + L) % L;

  const double tau = 2.0 * M_PI / static_cast<double>(L);
  for (const auto& oc : orbits) {
    if (!survives_projection(oc.period, basis.k, L)) continue;
    const u64 rep = oc.representative;
    const u64 rrep = orbit_representative(reverse_code(rep, L, d), L, d);
    if (rrep < rep) continue;  // chiral partner of an orbit handled earlier

    const int J = oc.period;
    std::vector<std::pair<u64, std::complex<double>>> fwd, bwd;
    fwd.reserve(static_cast<std::size_t>(J));
    bwd.reserve(static_cast<std::size_t>(J));
    const double w = 1.0 / std::sqrt(static_cast<double>(J));
    u64 c = rep;
    for (int j = 0; j < J; ++j) {
      const std::complex<double> amp =
          std::polar(w, -tau * static_cast<double>(j) * static_cast<double>(basis.k));
      fwd.emplace_back(c, amp);
      bwd.emplace_back(reverse_code(c, L, d), std::conj(amp));  // K a
      c = translate_code(c, L, d);
    }
    SparseVector a = detail::sorted_by_code(fwd);
    SparseVector ka = detail::sorted_by_code(bwd);

    if (rrep == rep) {
      // Achiral orbit: a and K a share support code-by-code.
      SparseVector u = a;
      for (std::size_t i = 0; i < u.amps.size(); ++i) u.amps[i] += ka.amps[i];
      if (detail::norm(u) < 1e-8) {
        u = a;
        const std::complex<double> im(0.0, 1.0);
        for (std::size_t i = 0; i < u.amps.size(); ++i) u.amps[i] = im * (a.amps[i] - ka.amps[i]);
      }
      detail::normalize_and_fix_sign(u);
      basis.vectors.push_back(std::move(u));
    } else {
      // Chiral pair: disjoint supports, two combinations.
      std::vector<std::pair<u64, std::complex<double>>> plus, minus;
      plus.reserve(2 * static_cast<std::size_t>(J));
      minus.reserve(2 * static_cast<std::size_t>(J));
      const std::complex<double> im(0.0, 1.0);
      for (std::size_t i = 0; i < a.codes.size(); ++i) {
        plus.emplace_back(a.codes[i], a.amps[i]);
        minus.emplace_back(a.codes[i], im * a.amps[i]);
      }
      for (std::size_t i = 0; i < ka.codes.size(); ++i) {
        plus.emplace_back(ka.codes[i], ka.amps[i]);
        minus.emplace_back(ka.codes[i], -im * ka.amps[i]);
      }
      SparseVector u1 = detail::sorted_by_code(std::move(plus));
      SparseVector u2 = detail::sorted_by_code(std::move(minus));
      detail::normalize_and_fix_sign(u1);
      detail::normalize_and_fix_sign(u2);
      basis.vectors.push_back(std::move(u1));
      basis.vectors.push_back(std::move(u2));
    }
  }

  if (basis.dim() != sector_dimension(L, d, basis.k))
    throw ConsistencyError("build_sector_basis: vector count disagrees with the dimension formula");
  return basis;
}

inline SectorBasis build_sector_basis(int L, int k) {
  return build_sector_basis(L, k, enumerate_orbit_representatives(L, 2));
}

}  // namespace kic
