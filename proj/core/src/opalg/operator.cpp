#include "evolab/opalg/operator.hpp"

#include "evolab/error.hpp"

#include <algorithm>
#include <cmath>

namespace evolab::opalg {

double NormSpec::x_norm(const Vector& x) const {
  if (q == 2.0) return weighted_norm(x, weights);
  return std::pow((weights.array() * x.array().abs().pow(q)).sum(), 1.0 / q);
}

NormSpecPtr unit_norms(const Matrix& reference) {
  auto n = std::make_shared<NormSpec>();
  n->weights = Vector::Ones(reference.rows());
  n->d_reference = reference;
  return n;
}

NormSpecPtr grid_norms(const Grid& grid, const Matrix& reference, double q) {
  if (!(q > 1.0)) throw PreconditionError("grid_norms: q must exceed 1");
  auto w = grid.dof_weights();
  if (static_cast<Index>(w.size()) != reference.rows())
    throw PreconditionError("grid_norms: reference size does not match the dof count");
  auto n = std::make_shared<NormSpec>();
  n->weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  n->q = q;
  n->d_reference = reference;
  return n;
}

bool DiscreteOperator::self_adjoint(double tol) const {
  // W A symmetric <=> A self-adjoint in <x,y>_W.
  Matrix wa = norms->weights.asDiagonal() * matrix;
  double scale = std::max(1.0, wa.cwiseAbs().maxCoeff());
  return (wa - wa.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

DiscreteOperator make_operator(Matrix m) {
  if (m.rows() != m.cols()) throw PreconditionError("make_operator: matrix must be square");
  DiscreteOperator op;
  op.norms = unit_norms(m);
  op.matrix = std::move(m);
  return op;
}

std::string to_string(ObservationKind k) {
  switch (k) {
    case ObservationKind::PointEvaluation: return "point-evaluation";
    case ObservationKind::BoundaryTrace: return "boundary-trace";
    case ObservationKind::Identity: return "identity";
    case ObservationKind::Custom: return "custom";
  }
  return "custom";
}

ObservationMap ObservationMap::scaled(double lambda) const {
  ObservationMap c = *this;
  c.matrix *= lambda;
  return c;
}

ObservationMap point_observation(const Grid& grid, Point c) {
  const auto& e = grid.extent();
  auto locate = [&](double v, double lo, double h, int n) {
    double s = (v - lo) / h;
    if (s < -1e-12 || s > n - 1 + 1e-12) throw PreconditionError("point_observation: point outside the domain");
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    return std::pair<int, double>{i, std::clamp(s - i, 0.0, 1.0)};
  };
  const int n = grid.n_per_dim();
  ObservationMap out;
  out.kind = ObservationKind::PointEvaluation;
  out.matrix = Matrix::Zero(1, static_cast<Index>(grid.dof_count()));
  out.y_weights = Vector::Ones(1);

  auto [ix, fx] = locate(c.x, e.x0, grid.hx(), n);
  auto add = [&](int i, int j, double w) {
    long d = grid.dof_of(grid.node_index(i, j));
    if (d >= 0 && w != 0.0) out.matrix(0, d) += w;  // Dirichlet nodes contribute 0
  };
  if (grid.dimension() == 1) {
    add(ix, 0, 1.0 - fx);
    add(ix + 1, 0, fx);
  } else {
    auto [iy, fy] = locate(c.y, e.y0, grid.hy(), n);
    add(ix, iy, (1 - fx) * (1 - fy));
    add(ix + 1, iy, fx * (1 - fy));
    add(ix, iy + 1, (1 - fx) * fy);
    add(ix + 1, iy + 1, fx * fy);
  }
  return out;
}

ObservationMap boundary_trace(const Grid& grid) {
  if (!grid.has_gamma1()) throw PreconditionError("boundary_trace: grid has no Neumann boundary");
  const auto& nodes = grid.gamma1_nodes();
  ObservationMap out;
  out.kind = ObservationKind::BoundaryTrace;
  out.matrix = Matrix::Zero(static_cast<Index>(nodes.size()), static_cast<Index>(grid.dof_count()));
  out.y_weights.resize(static_cast<Index>(nodes.size()));
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    out.matrix(static_cast<Index>(r), grid.dof_of(nodes[r])) = 1.0;
    out.y_weights(static_cast<Index>(r)) = grid.gamma1_weights()[r];
  }
  return out;
}

ObservationMap identity_observation(const NormSpec& norms) {
  ObservationMap out;
  out.kind = ObservationKind::Identity;
  out.matrix = Matrix::Identity(norms.size(), norms.size());
  out.y_weights = norms.weights;
  return out;
}

ObservationMap custom_observation(Matrix m, Vector y_weights) {
  if (y_weights.size() != m.rows()) throw PreconditionError("custom_observation: y_weights size mismatch");
  if ((y_weights.array() <= 0).any()) throw PreconditionError("custom_observation: Y weights must be positive");
  ObservationMap out;
  out.matrix = std::move(m);
  out.y_weights = std::move(y_weights);
  out.kind = ObservationKind::Custom;
  return out;
}

}  // namespace evolab::opalg
