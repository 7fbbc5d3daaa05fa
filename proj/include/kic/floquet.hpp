#pragma once

// Dense and sector-reduced builders for the kicked Ising Floquet operator.

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>

#include "kic/combinatorics.hpp"
#include "kic/errors.hpp"
#include "kic/model.hpp"
#include "kic/sector_basis.hpp"
#include "kic/validate.hpp"

namespace kic {

// exp(-i b.sigma) = cos|b| - i sin|b| (b.sigma)/|b| on a single site.
inline Eigen::Matrix2cd single_kick_matrix(const std::array<double, 3>& b) {
  const double r = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  Eigen::Matrix2cd u;
  if (r == 0.0) {
    u.setIdentity();
    return u;
  }
  const std::complex<double> im(0.0, 1.0);
  const double c = std::cos(r);
  const double s = std::sin(r) / r;
  u(0, 0) = c - im * s * b[2];
  u(0, 1) = -im * s * b[0] - s * b[1];
  u(1, 0) = -im * s * b[0] + s * b[1];
  u(1, 1) = c + im * s * b[2];
  return u;
}

// sum_j sz_j sz_{j+1} (periodic) for sz = +1 on bit 0; each differing
// neighbour pair flips a +1 into a -1.
inline double ising_phase_code(u64 code, int L, double J) {
  const u64 rot = (code >> 1) | ((code & 1ull) << (L - 1));
  const int aligned = L - 2 * std::popcount(code ^ rot);
  return J * static_cast<double>(aligned);
}

inline double ising_phase(const BasisState& s, double J) {
  if (s.d != 2) throw ArgumentError("ising_phase: defined for d = 2 only");
  return ising_phase_code(s.code(), s.sites(), J);
}

// One kick layer exp(-i sum_j b.sigma_j) applied in place; psi has length 2^L
// with site 0 on the most significant bit.
inline void apply_kick_sweep(Eigen::VectorXcd& psi, const Eigen::Matrix2cd& u, int L) {
  const u64 n = u64{1} << L;
  if (static_cast<u64>(psi.size()) != n)
    throw ArgumentError("apply_kick_sweep: state length is not 2^L");
  for (int site = 0; site < L; ++site) {
    const u64 bit = u64{1} << (L - 1 - site);
    for (u64 base = 0; base < n; ++base) {
      if (base & bit) continue;
      const std::complex<double> a0 = psi[static_cast<Eigen::Index>(base)];
      const std::complex<double> a1 = psi[static_cast<Eigen::Index>(base | bit)];
      psi[static_cast<Eigen::Index>(base)] = u(0, 0) * a0 + u(0, 1) * a1;
      psi[static_cast<Eigen::Index>(base | bit)] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

namespace detail {

inline Eigen::VectorXcd ising_diagonal(int L, double J) {
  const u64 n = u64{1} << L;
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(n));
  const std::complex<double> im(0.0, 1.0);
  for (u64 c = 0; c < n; ++c)
    diag[static_cast<Eigen::Index>(c)] = std::exp(-im * ising_phase_code(c, L, J));
  return diag;
}

}  // namespace detail

struct SectorOperator {
  int k = 0;
  bool symmetrized = true;
  ModelParams params;
  bool field_rotated = false;
  Eigen::MatrixXcd matrix;

  Eigen::Index dim() const { return matrix.rows(); }
};

// Sector-reduced Floquet matrix, built column by column through a dense 2^L
// scratch register.  The reflection-adapted basis makes the symmetrized
// variant complex symmetric; both properties are validated on exit.
inline SectorOperator sector_floquet(const ModelParams& params, const SectorBasis& basis,
                                     bool symmetrized = true, double tol = 1e-10,
                                     bool validate = true) {
  params.validate();
  const int L = basis.L;
  if (params.sites != L) throw ArgumentError("sector_floquet: params.sites differs from basis.L");
  if (L >= 30) throw ResourceError("sector_floquet: 2^L scratch register too large");

  const EffectiveField field = effective_field(params);
  const Eigen::Matrix2cd kick =
      symmetrized ? single_kick_matrix({field.value[0] / 2, 0.0, field.value[2] / 2})
                  : single_kick_matrix(field.value);
  const Eigen::VectorXcd ising = detail::ising_diagonal(L, params.coupling);

  const u64 n = u64{1} << L;
  const Eigen::Index dim = static_cast<Eigen::Index>(basis.dim());
  SectorOperator op;
  op.k = basis.k;
  op.symmetrized = symmetrized;
  op.params = params;
  op.field_rotated = field.rotated;
  op.matrix.resize(dim, dim);

  Eigen::VectorXcd psi(static_cast<Eigen::Index>(n));
  for (Eigen::Index col = 0; col < dim; ++col) {
    psi.setZero();
    const SparseVector& v = basis.vectors[static_cast<std::size_t>(col)];
    for (std::size_t i = 0; i < v.codes.size(); ++i)
      psi[static_cast<Eigen::Index>(v.codes[i])] = v.amps[i];

    apply_kick_sweep(psi, kick, L);
    psi.array() *= ising.array();
    if (symmetrized) apply_kick_sweep(psi, kick, L);

    for (Eigen::Index row = 0; row < dim; ++row) {
      const SparseVector& u = basis.vectors[static_cast<std::size_t>(row)];
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t i = 0; i < u.codes.size(); ++i)
        acc += std::conj(u.amps[i]) * psi[static_cast<Eigen::Index>(u.codes[i])];
      op.matrix(row, col) = acc;
    }
  }

  if (validate) {
    require_unitary(op.matrix, tol, "sector_floquet");
    if (symmetrized) require_symmetric(op.matrix, tol, "sector_floquet");
  }
  return op;
}

// Direct 2^L x 2^L Floquet matrix; cross-check route for small chains.
inline Eigen::MatrixXcd build_full_floquet(const ModelParams& params, bool symmetrized = true) {
  params.validate();
  const int L = params.sites;
  if (L > 12) throw ResourceError("build_full_floquet: dense 2^L x 2^L matrix needs L <= 12");

  const EffectiveField field = effective_field(params);
  const Eigen::Matrix2cd kick =
      symmetrized ? single_kick_matrix({field.value[0] / 2, 0.0, field.value[2] / 2})
                  : single_kick_matrix(field.value);
  const Eigen::VectorXcd ising = detail::ising_diagonal(L, params.coupling);

  const u64 n = u64{1} << L;
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(n));
  for (u64 c = 0; c < n; ++c) {
    psi.setZero();
    psi[static_cast<Eigen::Index>(c)] = 1.0;
    apply_kick_sweep(psi, kick, L);
    psi.array() *= ising.array();
    if (symmetrized) apply_kick_sweep(psi, kick, L);
    u.col(static_cast<Eigen::Index>(c)) = psi;
  }
  return u;
}

}  // namespace kic
