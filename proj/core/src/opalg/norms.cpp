#include "evolab/opalg/norms.hpp"

#include "evolab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace evolab::opalg {

double x_operator_norm(const Matrix& m, const Vector& w_in, const Vector& w_out) {
  if (m.size() == 0) return 0.0;
  Matrix e = euclidean_representative(m, w_in, w_out);
  Eigen::JacobiSVD<Matrix> svd(e);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

namespace {

// Largest generalized eigenvalue of (K, B), B symmetric positive definite.
double top_generalized(const Matrix& k, const Matrix& b) {
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) throw NumericalError("relative_operator_norm: denominator form not definite");
  Matrix l_inv_k = llt.matrixL().solve(k);
  Matrix c = llt.matrixL().solve(l_inv_k.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es((c + c.transpose()) * 0.5, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace

double relative_operator_norm(const Matrix& m, const Vector& w_in, const Vector& w_out, double a, double b,
                              const Matrix& reference) {
  if (a < 0 || b < 0 || (a == 0 && b == 0)) throw PreconditionError("relative_operator_norm: need a, b >= 0, not both 0");
  if (m.size() == 0 || m.isZero(0.0)) return 0.0;
  Matrix k = m.transpose() * w_out.asDiagonal() * m;
  Matrix w = w_in.asDiagonal();
  if (b == 0) return std::sqrt(top_generalized(k, a * a * w));
  Matrix r = reference.transpose() * w_in.asDiagonal() * reference;
  if (a == 0) return std::sqrt(top_generalized(k, b * b * r));

  // Inner maximization over x for fixed λ is a symmetric-definite eigenproblem.
  auto f = [&](double z) {
    double lam = 1.0 / (1.0 + std::exp(-z));
    double mu = 1.0 - lam;
    if (lam <= 0 || mu <= 0) return 0.0;
    return top_generalized(k, (a * a / lam) * w + (b * b / mu) * r);
  };
  const int scan = 33;
  const double zlo = -18.0, zhi = 18.0;
  double best = -1.0;
  int ibest = 0;
  std::vector<double> vals(scan);
  for (int i = 0; i < scan; ++i) {
    vals[i] = f(zlo + (zhi - zlo) * i / (scan - 1));
    if (vals[i] > best) best = vals[i], ibest = i;
  }
  double lo = zlo + (zhi - zlo) * std::max(0, ibest - 1) / (scan - 1);
  double hi = zlo + (zhi - zlo) * std::min(scan - 1, ibest + 1) / (scan - 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = f(x2);
    } else {
      hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = f(x1);
    }
  }
  best = std::max({best, f1, f2});
  return std::sqrt(best);
}

double dx_operator_norm(const Matrix& m, const NormSpec& norms) {
  return relative_operator_norm(m, norms.weights, norms.weights, 1.0, 1.0, norms.d_reference);
}

double dy_operator_norm(const ObservationMap& c, const NormSpec& norms) {
  return relative_operator_norm(c.matrix, norms.weights, c.y_weights, 1.0, 1.0, norms.d_reference);
}

Matrix low_mode_basis(const Matrix& reference, const Vector& weights, Index count) {
  Matrix wa = weights.asDiagonal() * reference;
  Matrix sym = 0.5 * (wa + wa.transpose());
  Matrix w = weights.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sym, w);
  if (es.info() != Eigen::Success) throw NumericalError("low_mode_basis: eigensolver failed");
  count = std::clamp<Index>(count, 1, reference.rows());
  return es.eigenvectors().leftCols(count);
}

Matrix d_probe_basis(const NormSpec& norms) {
  Index n = norms.size();
  return low_mode_basis(norms.d_reference, norms.weights, (2 * n + 2) / 3);
}

}  // namespace evolab::opalg
