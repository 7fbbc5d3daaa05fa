#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "kic/errors.hpp"
#include "kic/floquet.hpp"
#include "kic/model.hpp"

namespace kic {

// Eigenphases phi of a unitary with eigenvalues exp(-i phi), phi in [0, 2 pi),
// sorted ascending.  `k` doubles as the ensemble member index for sampled
// matrices, with L = 0 marking a non-physical source.
struct QuasiEnergySpectrum {
  int L = 0;
  int k = 0;
  bool symmetrized = true;
  ModelParams params;
  std::vector<double> phases;
  double max_residual = 0.0;

  std::size_t dim() const { return phases.size(); }
};

// Full complex Schur-based eigensolve with validation: every eigenvalue must
// be unimodular to 1e-8 and every residual ||U v - lambda v|| below `tol`.
inline QuasiEnergySpectrum eigenphases_of_matrix(const Eigen::MatrixXcd& u, double tol = 1e-10) {
  const Eigen::Index n = u.rows();
  if (n < 1 || u.cols() != n) throw ArgumentError("eigenphases_of_matrix: need a square matrix");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(u, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigenphases_of_matrix: eigensolver did not converge");

  const auto& lambda = solver.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dev = std::abs(std::abs(lambda[i]) - 1.0);
    if (dev > 1e-8)
      throw NumericalError("eigenphases_of_matrix: eigenvalue modulus deviates from 1 by " +
                               std::to_string(dev),
                           dev);
  }

  const Eigen::MatrixXcd& v = solver.eigenvectors();
  const double residual =
      (u * v - v * lambda.asDiagonal()).colwise().norm().maxCoeff();
  if (!(residual <= tol))
    throw NumericalError("eigenphases_of_matrix: worst eigenpair residual " +
                             std::to_string(residual) + " exceeds tolerance " +
                             std::to_string(tol),
                         residual);

  QuasiEnergySpectrum spec;
  spec.max_residual = residual;
  spec.phases.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double phi = -std::arg(lambda[i]);
    if (phi < 0.0) phi += 2.0 * M_PI;
    if (phi >= 2.0 * M_PI) phi = 0.0;
    spec.phases.push_back(phi);
  }
  std::sort(spec.phases.begin(), spec.phases.end());
  return spec;
}

inline QuasiEnergySpectrum eigenphases(const SectorOperator& op, double tol = 1e-10) {
  QuasiEnergySpectrum spec = eigenphases_of_matrix(op.matrix, tol);
  spec.L = op.params.sites;
  spec.k = op.k;
  spec.symmetrized = op.symmetrized;
  spec.params = op.params;
  return spec;
}

// Tr U^t from the stored phases; t may be negative, t = 0 gives the dimension.
inline std::complex<double> trace_power(const QuasiEnergySpectrum& spec, long long t) {
  std::complex<double> acc(0.0, 0.0);
  const double tt = static_cast<double>(t);
  for (double phi : spec.phases) acc += std::polar(1.0, -phi * tt);
  return acc;
}

}  // namespace kic
