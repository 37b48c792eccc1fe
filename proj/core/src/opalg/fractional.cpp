#include "evolab/opalg/fractional.hpp"

#include "evolab/error.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>

namespace evolab::opalg {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw PreconditionError("fractional_power: alpha must be positive");
}

bool weighted_symmetric(const Matrix& m, const Vector& w) {
  Matrix wm = w.asDiagonal() * m;
  double scale = std::max(1.0, wm.cwiseAbs().maxCoeff());
  return (wm - wm.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void spectrum_error(double re) {
  std::ostringstream msg;
  msg << "fractional_power: spectrum not in the open right half-plane (eigenvalue real part " << re << ")";
  throw PreconditionError(msg.str());
}

}  // namespace

Matrix matrix_power(const Matrix& m, double alpha, const Vector& weights) {
  check_alpha(alpha);
  if (m.rows() != m.cols()) throw PreconditionError("fractional_power: matrix must be square");
  if (alpha == 1.0) return m;

  if (weighted_symmetric(m, weights)) {
    Vector s = weights.array().sqrt();
    Matrix e = s.asDiagonal() * m * s.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (e + e.transpose()));
    if (es.eigenvalues().minCoeff() <= 0) spectrum_error(es.eigenvalues().minCoeff());
    Vector p = es.eigenvalues().array().pow(alpha);
    Matrix pe = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().transpose();
    return s.cwiseInverse().asDiagonal() * pe * s.asDiagonal();
  }

  Eigen::EigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("fractional_power: eigensolver failed");
  ComplexVector lam = es.eigenvalues();
  for (Index k = 0; k < lam.size(); ++k)
    if (lam(k).real() <= 0) spectrum_error(lam(k).real());
  ComplexMatrix v = es.eigenvectors();
  Eigen::JacobiSVD<ComplexMatrix> svd(v);
  const auto& sv = svd.singularValues();
  double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kDefectiveThreshold)) {
    std::ostringstream msg;
    msg << "fractional_power: eigenvector condition number " << cond << " exceeds " << kDefectiveThreshold
        << "; use fractional_power_schur";
    throw DefectiveMatrixError(msg.str());
  }
  ComplexVector p(lam.size());
  for (Index k = 0; k < lam.size(); ++k) p(k) = std::pow(lam(k), alpha);  // principal branch
  ComplexMatrix r = v * p.asDiagonal() * v.inverse();
  return r.real();
}

DiscreteOperator fractional_power(const DiscreteOperator& op, double alpha) {
  if (alpha == 1.0) return op;
  DiscreteOperator out = op;
  out.matrix = matrix_power(op.matrix, alpha, op.norms->weights);
  return out;
}

DiscreteOperator fractional_power_schur(const DiscreteOperator& op, double alpha) {
  check_alpha(alpha);
  if (alpha == 1.0) return op;
  Eigen::EigenSolver<Matrix> es(op.matrix, false);
  for (Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k).real() <= 0) spectrum_error(es.eigenvalues()(k).real());
  DiscreteOperator out = op;
  Eigen::MatrixPower<Matrix> mp(op.matrix);
  out.matrix = mp(alpha);
  if (!out.matrix.allFinite()) throw NumericalError("fractional_power_schur: non-finite result");
  return out;
}

}  // namespace evolab::opalg
