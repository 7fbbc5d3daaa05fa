#pragma once

// Circular-ensemble sampling.  Haar unitaries come from the QR decomposition
// of a complex Ginibre matrix with the R-diagonal phase correction
// (Mezzadri's recipe); COE members are S = U^T U.

#include <Eigen/Dense>
#include <vector>

#include "kic/diagonalize.hpp"
#include "kic/errors.hpp"
#include "kic/philox.hpp"
#include "kic/validate.hpp"

namespace kic {

inline Eigen::MatrixXcd sample_haar_unitary(int dim, Philox4x64& rng) {
  if (dim < 1) throw ArgumentError("sample_haar_unitary: need dim >= 1");
  Eigen::MatrixXcd g(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col)
    for (Eigen::Index row = 0; row < dim; ++row) g(row, col) = complex_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
  const auto rdiag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const std::complex<double> r = rdiag[j];
    const double mag = std::abs(r);
    q.col(j) *= mag > 0.0 ? r / mag : std::complex<double>(1.0, 0.0);
  }
  return q;
}

inline Eigen::MatrixXcd sample_coe(int dim, Philox4x64& rng) {
  const Eigen::MatrixXcd u = sample_haar_unitary(dim, rng);
  return u.transpose() * u;
}

struct EnsembleSpec {
  int dim = 0;
  int members = 0;
  std::uint64_t seed = 0;
};

// COE spectra through the same validation and diagonalization path as the
// physical sector operators.  Member i uses stream i of the seed and is
// labelled k = i, L = 0.
inline std::vector<QuasiEnergySpectrum> sample_coe_spectra(const EnsembleSpec& spec,
                                                           double tol = 1e-10) {
  if (spec.dim < 1 || spec.members < 1)
    throw ArgumentError("sample_coe_spectra: need dim >= 1 and members >= 1");
  std::vector<QuasiEnergySpectrum> out;
  out.reserve(static_cast<std::size_t>(spec.members));
  for (int i = 0; i < spec.members; ++i) {
    Philox4x64 rng(spec.seed, static_cast<std::uint64_t>(i));
    const Eigen::MatrixXcd s = sample_coe(spec.dim, rng);
    require_unitary(s, tol, "sample_coe_spectra");
    require_symmetric(s, tol, "sample_coe_spectra");
    QuasiEnergySpectrum q = eigenphases_of_matrix(s, tol);
    q.L = 0;
    q.k = i;
    q.symmetrized = true;
    out.push_back(std::move(q));
  }
  return out;
}

// Dimension-matched variant: member i gets dims[i % dims.size()].
inline std::vector<QuasiEnergySpectrum> sample_coe_spectra_matched(
    const std::vector<int>& dims, int members, std::uint64_t seed, double tol = 1e-10) {
  if (dims.empty() || members < 1)
    throw ArgumentError("sample_coe_spectra_matched: need dims and members >= 1");
  std::vector<QuasiEnergySpectrum> out;
  out.reserve(static_cast<std::size_t>(members));
  for (int i = 0; i < members; ++i) {
    const int dim = dims[static_cast<std::size_t>(i) % dims.size()];
    Philox4x64 rng(seed, static_cast<std::uint64_t>(i));
    const Eigen::MatrixXcd s = sample_coe(dim, rng);
    require_unitary(s, tol, "sample_coe_spectra_matched");
    require_symmetric(s, tol, "sample_coe_spectra_matched");
    QuasiEnergySpectrum q = eigenphases_of_matrix(s, tol);
    q.L = 0;
    q.k = i;
    q.symmetrized = true;
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace kic
