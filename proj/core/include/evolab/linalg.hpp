#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace evolab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Time-indexed sequence of vectors, one per node of a time grid.
using Trajectory = std::vector<Vector>;

/// sqrt(x^T diag(w) x)
inline double weighted_norm(const Vector& x, const Vector& w) {
  return std::sqrt((w.array() * x.array().square()).sum());
}

/// diag(sqrt(w)) M diag(1/sqrt(w_in)): the Euclidean representative of a map
/// between weighted-l2 spaces.
inline Matrix euclidean_representative(const Matrix& m, const Vector& w_in, const Vector& w_out) {
  return w_out.array().sqrt().matrix().asDiagonal() * m *
         w_in.array().sqrt().inverse().matrix().asDiagonal();
}

}  // namespace evolab
