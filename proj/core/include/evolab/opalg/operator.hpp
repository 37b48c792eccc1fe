#pragma once

#include "evolab/linalg.hpp"
#include "evolab/opalg/grid.hpp"

#include <memory>
#include <string>

namespace evolab::opalg {

/// Norm descriptors shared by every operator of one model.
///
/// X is weighted l^q over the dofs (q = 2 unless stated otherwise); D carries the
/// graph norm ‖x‖ + ‖A_ref x‖ of a designated reference operator.
struct NormSpec {
  Vector weights;
  double q = 2.0;
  Matrix d_reference;

  double x_norm(const Vector& x) const;
  double d_norm(const Vector& x) const { return x_norm(x) + x_norm(d_reference * x); }
  bool hilbert() const { return q == 2.0; }
  Index size() const { return weights.size(); }
};

using NormSpecPtr = std::shared_ptr<const NormSpec>;

/// Uniform weights w = 1 and D-reference = `reference`; used by scalar and diagonal fixtures.
NormSpecPtr unit_norms(const Matrix& reference);
NormSpecPtr grid_norms(const Grid& grid, const Matrix& reference, double q = 2.0);

/// A(t) ∈ L(D, X) at one time, as a dense matrix on the dofs.
struct DiscreteOperator {
  Matrix matrix;
  NormSpecPtr norms;
  std::shared_ptr<const Grid> grid;  // null for grid-free fixtures

  Index size() const { return matrix.rows(); }
  double x_norm(const Vector& x) const { return norms->x_norm(x); }
  double d_norm(const Vector& x) const { return norms->d_norm(x); }

  /// True when the matrix is self-adjoint in the weighted inner product.
  bool self_adjoint(double tol = 1e-12) const;
};

/// Operator with its own norms (unit weights) and itself as the D-reference.
DiscreteOperator make_operator(Matrix m);

enum class ObservationKind { PointEvaluation, BoundaryTrace, Identity, Custom };
std::string to_string(ObservationKind k);

/// C ∈ L(D, Y): a matrix from dofs to outputs plus the Y weights.
struct ObservationMap {
  Matrix matrix;
  Vector y_weights;
  ObservationKind kind = ObservationKind::Custom;

  Index outputs() const { return matrix.rows(); }
  double y_norm(const Vector& y) const { return weighted_norm(y, y_weights); }
  ObservationMap scaled(double lambda) const;
};

/// Cφ = φ(c) by linear (1D) or bilinear (2D) interpolation of the nodal values.
ObservationMap point_observation(const Grid& grid, Point c);
/// Cu = u|Γ1 with the trapezoidal boundary weights as Y weights.
ObservationMap boundary_trace(const Grid& grid);
ObservationMap identity_observation(const NormSpec& norms);
ObservationMap custom_observation(Matrix m, Vector y_weights);

}  // namespace evolab::opalg
