#pragma once

#include "evolab/linalg.hpp"
#include "evolab/opalg/operator.hpp"

namespace evolab::opalg {

/// ‖M‖ between weighted-l2 spaces: largest singular value of the Euclidean representative.
double x_operator_norm(const Matrix& m, const Vector& w_in, const Vector& w_out);

/// sup_x ‖M x‖_out / (a‖x‖_in + b‖R x‖_in), evaluated exactly through
///   (a u + b v)^2 = min_{λ∈(0,1)} a²u²/λ + b²v²/(1-λ)
/// so the supremum is max over λ of a generalized symmetric eigenvalue.
double relative_operator_norm(const Matrix& m, const Vector& w_in, const Vector& w_out, double a,
                              double b, const Matrix& reference);

/// ‖M‖_{D→X} with the graph norm of `norms`.
double dx_operator_norm(const Matrix& m, const NormSpec& norms);

/// ‖C‖_{D→Y}.
double dy_operator_norm(const ObservationMap& c, const NormSpec& norms);

/// W-orthonormal basis (columns) of eigenvectors of the W-symmetric part of `reference`,
/// ascending eigenvalue order, truncated to the first `count` columns.
Matrix low_mode_basis(const Matrix& reference, const Vector& weights, Index count);

/// Probe subspace for "x ∈ D": lowest ceil(2n/3) modes of the reference operator.
Matrix d_probe_basis(const NormSpec& norms);

}  // namespace evolab::opalg
