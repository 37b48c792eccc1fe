#include "evolab/opalg/trace_norm.hpp"

#include "evolab/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace evolab::opalg {

namespace {

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("trace_norm: p must lie in (1, inf)");
}

[[noreturn]] void tail_error(double re) {
  std::ostringstream msg;
  msg << "trace_norm: tail integral does not converge (eigenvalue real part " << re << ")";
  throw NumericalError(msg.str());
}

// Modal data: A e^{-tA} x = V (λ e^{-λt} c) with X-norm computed through `norm_of`.
struct Modes {
  ComplexMatrix v;
  ComplexVector lambda;
  ComplexVector c;
};

Modes modes_of(const DiscreteOperator& op, const Vector& x) {
  Modes m;
  const Vector& w = op.norms->weights;
  if (op.self_adjoint()) {
    Vector s = w.array().sqrt();
    Matrix e = s.asDiagonal() * op.matrix * s.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (e + e.transpose()));
    m.lambda = es.eigenvalues().cast<std::complex<double>>();
    Matrix vx = s.cwiseInverse().asDiagonal() * es.eigenvectors();
    m.v = vx.cast<std::complex<double>>();
    m.c = (es.eigenvectors().transpose() * (s.asDiagonal() * x)).cast<std::complex<double>>();
  } else {
    Eigen::EigenSolver<Matrix> es(op.matrix);
    if (es.info() != Eigen::Success) throw NumericalError("trace_norm: eigensolver failed");
    m.lambda = es.eigenvalues();
    m.v = es.eigenvectors();
    Eigen::PartialPivLU<ComplexMatrix> lu(m.v);
    m.c = lu.solve(x.cast<std::complex<double>>());
  }
  for (Index k = 0; k < m.lambda.size(); ++k)
    if (m.lambda(k).real() <= 0) tail_error(m.lambda(k).real());
  return m;
}

double moment_integral(const DiscreteOperator& op, const Modes& m, double p) {
  const Vector& w = op.norms->weights;
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < m.lambda.size(); ++k) {
    if (std::abs(m.c(k)) == 0.0) continue;
    lmax = std::max(lmax, std::abs(m.lambda(k)));
    lmin = std::min(lmin, m.lambda(k).real());
  }
  if (lmax == 0.0) return 0.0;
  auto integrand = [&](double t) {
    ComplexVector z(m.lambda.size());
    for (Index k = 0; k < z.size(); ++k) z(k) = m.lambda(k) * std::exp(-m.lambda(k) * t) * m.c(k);
    Vector y = (m.v * z).real();
    return std::pow(weighted_norm(y, w), p);
  };
  using boost::math::quadrature::gauss_kronrod;
  // Geometric panels [0, 1/λmax], [2^k/λmax, 2^{k+1}/λmax], ... until e^{-p λmin t} is negligible.
  double total = 0.0;
  double a = 0.0, b = 1.0 / lmax;
  for (int k = 0; k < 400; ++k) {
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 8, 1e-13, &err);
    if (p * lmin * b > 60.0) break;
    a = b;
    b *= 2.0;
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace

double trace_norm(const DiscreteOperator& op, const Vector& x, double p) {
  check_p(p);
  if (x.size() != op.size()) throw PreconditionError("trace_norm: vector size mismatch");
  if (x.isZero(0.0)) return 0.0;
  Modes m = modes_of(op, x);
  if (p == 2.0 && op.self_adjoint()) {
    double s = 0.0;
    for (Index k = 0; k < m.lambda.size(); ++k) s += 0.5 * m.lambda(k).real() * std::norm(m.c(k));
    return op.x_norm(x) + std::sqrt(s);
  }
  return op.x_norm(x) + moment_integral(op, m, p);
}

double trace_norm_quadrature(const DiscreteOperator& op, const Vector& x, double p) {
  check_p(p);
  if (x.size() != op.size()) throw PreconditionError("trace_norm: vector size mismatch");
  if (x.isZero(0.0)) return 0.0;
  Modes m = modes_of(op, x);
  return op.x_norm(x) + moment_integral(op, m, p);
}

double trace_norm_upper_constant(const DiscreteOperator& op, double p) {
  check_p(p);
  if (!op.self_adjoint()) throw PreconditionError("trace_norm_upper_constant: operator must be self-adjoint");
  const Vector& w = op.norms->weights;
  Vector s = w.array().sqrt();
  Matrix e = s.asDiagonal() * op.matrix * s.cwiseInverse().asDiagonal();
  double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (e + e.transpose()), Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .minCoeff();
  if (lmin <= 0) tail_error(lmin);
  return std::max(1.0, std::pow(p * lmin, -1.0 / p));
}

}  // namespace evolab::opalg
