#pragma once

#include "evolab/opalg/operator.hpp"

namespace evolab::opalg {

/// Eigenvector condition number above which the diagonalization route is refused.
inline constexpr double kDefectiveThreshold = 1e8;

/// Principal power A^alpha by eigendecomposition (weighted-symmetric inputs use the
/// self-adjoint solver). Requires the spectrum in the open right half-plane and alpha > 0.
/// alpha == 1 returns the input unchanged. Throws DefectiveMatrixError when the eigenvector
/// basis is too ill-conditioned; use fractional_power_schur then.
DiscreteOperator fractional_power(const DiscreteOperator& op, double alpha);

/// Schur-based fallback for defective or nearly defective matrices.
DiscreteOperator fractional_power_schur(const DiscreteOperator& op, double alpha);

/// Matrix-level entry point used by both of the above.
Matrix matrix_power(const Matrix& m, double alpha, const Vector& weights);

}  // namespace evolab::opalg
