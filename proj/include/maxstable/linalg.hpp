#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace maxstable {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Relative eigenvalue floor: eigenvalues in [-kPsdFloor * lambda_max, 0) are
// treated as round-off and clamped to zero.
inline constexpr double kPsdFloor = 1e-10;

struct PsdFactor {
  Matrix clamped;  // symmetric PSD matrix after the eigenvalue clamp
  Matrix factor;   // factor * factor^T == clamped (pivoted LDL^T)
  double min_eigenvalue = 0.0;  // before clamping
  double max_eigenvalue = 0.0;
};

// Validates symmetry and positive semidefiniteness of `m`, clamps round-off
// negative eigenvalues and returns a square-root factor. Throws
// std::invalid_argument if the matrix is not square, finite and symmetric,
// NumericError (naming `what`) if it is genuinely indefinite.
[[nodiscard]] PsdFactor psd_factor(const Matrix& m, std::string_view what);

// Symmetric part of `m`; throws std::invalid_argument when |m - m^T| exceeds
// 1e-12 relative to the largest entry.
[[nodiscard]] Matrix require_symmetric(const Matrix& m, std::string_view what);

}  // namespace maxstable
