#include "maxstable/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "maxstable/errors.hpp"

namespace maxstable {

Matrix require_symmetric(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
  return 0.5 * (m + m.transpose());
}

PsdFactor psd_factor(const Matrix& m, std::string_view what) {
  PsdFactor out;
  const Matrix sym = require_symmetric(m, what);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericError(std::string(what) + ": eigen decomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  out.min_eigenvalue = lambda.minCoeff();
  out.max_eigenvalue = lambda.maxCoeff();
  const double floor = -kPsdFloor * std::max(out.max_eigenvalue, 0.0);
  if (out.min_eigenvalue < floor) {
    throw NumericError(std::string(what) + ": matrix is not positive semidefinite (eigenvalue " +
                       std::to_string(out.min_eigenvalue) + ")");
  }
  if (out.min_eigenvalue < 0.0) {
    const Vector clamped = lambda.cwiseMax(0.0);
    out.clamped = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    out.clamped = 0.5 * (out.clamped + out.clamped.transpose()).eval();
  } else {
    out.clamped = sym;
  }

  // Pivoted Cholesky (LDL^T). Semidefinite inputs give zero pivots; tiny
  // negative pivots from round-off are clamped like the eigenvalues.
  Eigen::LDLT<Matrix> ldlt(out.clamped);
  if (ldlt.info() != Eigen::Success) {
    throw NumericError(std::string(what) + ": Cholesky factorization failed after clamp");
  }
  Vector d = ldlt.vectorD();
  const double dmax = std::max(d.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < -1e-8 * std::max(dmax, 1.0)) {
      throw NumericError(std::string(what) + ": Cholesky pivot is negative after clamp");
    }
    d[i] = std::sqrt(std::max(d[i], 0.0));
  }
  const Matrix lower = ldlt.matrixL();
  // clamped = P^T L D L^T P
  out.factor = ldlt.transpositionsP().transpose() * (lower * d.asDiagonal());
  return out;
}

}  // namespace maxstable
