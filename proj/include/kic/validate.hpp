#pragma once

#include <Eigen/Dense>
#include <string>

#include "kic/errors.hpp"

namespace kic {

inline double unitarity_defect(const Eigen::MatrixXcd& u) {
  const Eigen::Index n = u.rows();
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

inline double symmetry_defect(const Eigen::MatrixXcd& u) {
  return (u - u.transpose()).cwiseAbs().maxCoeff();
}

inline void require_unitary(const Eigen::MatrixXcd& u, double tol, const std::string& who) {
  const double defect = unitarity_defect(u);
  if (!(defect <= tol))
    throw NumericalError(who + ": unitarity defect " + std::to_string(defect) +
                             " exceeds tolerance " + std::to_string(tol),
                         defect);
}

inline void require_symmetric(const Eigen::MatrixXcd& u, double tol, const std::string& who) {
  const double defect = symmetry_defect(u);
  if (!(defect <= tol))
    throw NumericalError(who + ": symmetry defect " + std::to_string(defect) +
                             " exceeds tolerance " + std::to_string(tol),
                         defect);
}

}  // namespace kic
