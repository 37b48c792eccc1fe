#include "evolab/opalg/assembly.hpp"

#include "evolab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace evolab::opalg {

Ellipticity check_ellipticity(const Grid& grid, const TensorField& a, const std::vector<double>& time_grid) {
  Ellipticity e;
  e.beta_hat = std::numeric_limits<double>::infinity();
  const int d = grid.dimension();
  for (double t : time_grid) {
    for (auto node : grid.dofs()) {
      Point x = grid.nodes()[node];
      Eigen::Matrix2d m = a(t, x);
      double lmin;
      if (d == 1) {
        lmin = m(0, 0);
      } else {
        Eigen::Matrix2d s = 0.5 * (m + m.transpose());
        lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(s, Eigen::EigenvaluesOnly).eigenvalues()(0);
      }
      if (!std::isfinite(lmin) || lmin <= 0.0) {
        std::ostringstream msg;
        msg << "ellipticity violated: min eigenvalue " << lmin << " of a(t,x) at t = " << t << ", x = (" << x.x;
        if (d == 2) msg << ", " << x.y;
        msg << ")";
        throw PreconditionError(msg.str());
      }
      if (lmin < e.beta_hat) e.beta_hat = lmin, e.t_min = t, e.x_min = x;
    }
  }
  return e;
}

namespace {

// Reflect an out-of-range grid index across the boundary (ghost node of a Neumann side).
int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i > n - 1) return 2 * (n - 1) - i;
  return i;
}

Matrix assemble_at(const Grid& grid, const TensorField& a, const ScalarField& b0, double t) {
  const Index nd = static_cast<Index>(grid.dof_count());
  const int n = grid.n_per_dim();
  const double hx = grid.hx(), hy = grid.hy();
  Matrix m = Matrix::Zero(nd, nd);

  for (Index r = 0; r < nd; ++r) {
    std::size_t node = grid.dofs()[r];
    auto [i, j] = grid.position(node);
    Point x = grid.nodes()[node];
    Eigen::Matrix2d c = a(t, x);
    auto add = [&](int di, int dj, double v) {
      int ii = reflect(i + di, n);
      int jj = grid.dimension() == 2 ? reflect(j + dj, n) : 0;
      long col = grid.dof_of(grid.node_index(ii, jj));
      if (col >= 0) m(r, col) += v;
    };
    // −a11 ∂xx
    add(-1, 0, -c(0, 0) / (hx * hx));
    add(0, 0, 2 * c(0, 0) / (hx * hx));
    add(1, 0, -c(0, 0) / (hx * hx));
    if (grid.dimension() == 2) {
      add(0, -1, -c(1, 1) / (hy * hy));
      add(0, 0, 2 * c(1, 1) / (hy * hy));
      add(0, 1, -c(1, 1) / (hy * hy));
      double cross = -(c(0, 1) + c(1, 0)) / (4 * hx * hy);
      if (cross != 0.0) {
        add(1, 1, cross);
        add(-1, -1, cross);
        add(1, -1, -cross);
        add(-1, 1, -cross);
      }
    }
    if (b0) m(r, r) -= b0(t, x);
  }
  return m;
}

}  // namespace

OperatorFamily assemble_variable_heat(std::shared_ptr<const Grid> grid, const TensorField& a, const ScalarField& b0,
                                      const std::vector<double>& time_grid, Interpolation interpolation) {
  if (!grid) throw PreconditionError("assemble_variable_heat: null grid");
  if (time_grid.empty()) throw PreconditionError("assemble_variable_heat: empty time grid");
  check_ellipticity(*grid, a, time_grid);

  std::vector<Matrix> mats;
  mats.reserve(time_grid.size());
  for (double t : time_grid) mats.push_back(assemble_at(*grid, a, b0, t));
  auto norms = grid_norms(*grid, mats.front());

  std::vector<DiscreteOperator> samples;
  samples.reserve(mats.size());
  for (auto& m : mats) samples.push_back(DiscreteOperator{std::move(m), norms, grid});
  return OperatorFamily(time_grid, std::move(samples), interpolation);
}

DiscreteOperator assemble_mixed_laplacian(std::shared_ptr<const Grid> grid) {
  if (!grid) throw PreconditionError("assemble_mixed_laplacian: null grid");
  if (!grid->has_gamma0()) throw PreconditionError("assemble_mixed_laplacian: Γ0 is empty (operator would be singular)");
  if (!grid->has_gamma1()) throw PreconditionError("assemble_mixed_laplacian: Γ1 is empty (no Neumann part)");
  TensorField id = [](double, Point) { return Eigen::Matrix2d::Identity().eval(); };
  Matrix m = assemble_at(*grid, id, nullptr, 0.0);
  auto norms = grid_norms(*grid, m);
  return DiscreteOperator{std::move(m), norms, grid};
}

Matrix nonlocal_kernel_matrix(const Grid& grid, const KernelField& psi, double t) {
  const auto& g1 = grid.gamma1_nodes();
  const auto& g1w = grid.gamma1_weights();
  Matrix k(static_cast<Index>(grid.dof_count()), static_cast<Index>(g1.size()));
  for (Index r = 0; r < k.rows(); ++r) {
    Point x = grid.nodes()[grid.dofs()[r]];
    for (std::size_t c = 0; c < g1.size(); ++c) {
      Point z = grid.nodes()[g1[c]];
      double v = psi(t, x, z);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "nonlocal kernel is not finite at t = " << t << ", x = (" << x.x << ", " << x.y << "), z = (" << z.x
            << ", " << z.y << ")";
        throw NumericalError(msg.str());
      }
      k(r, static_cast<Index>(c)) = v * g1w[c];
    }
  }
  return k;
}

OperatorFamily assemble_nonlocal_perturbation(std::shared_ptr<const Grid> grid, const KernelField& psi,
                                              const TimeFunction& b_of_t, const std::vector<double>& time_grid,
                                              NormSpecPtr norms) {
  if (!grid) throw PreconditionError("assemble_nonlocal_perturbation: null grid");
  if (!grid->has_gamma1()) throw PreconditionError("assemble_nonlocal_perturbation: Γ1 is empty");
  Matrix trace = boundary_trace(*grid).matrix;
  std::vector<DiscreteOperator> samples;
  for (double t : time_grid) {
    double b = b_of_t ? b_of_t(t) : 1.0;
    if (!std::isfinite(b)) throw NumericalError("assemble_nonlocal_perturbation: b(t) not finite");
    samples.push_back(DiscreteOperator{b * nonlocal_kernel_matrix(*grid, psi, t) * trace, norms, grid});
  }
  return OperatorFamily(time_grid, std::move(samples), Interpolation::Linear);
}

double kernel_distance(const Grid& grid, const KernelField& psi, double t, double s) {
  const auto& g1 = grid.gamma1_nodes();
  const auto& g1w = grid.gamma1_weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    Point x = grid.nodes()[k];
    for (std::size_t c = 0; c < g1.size(); ++c) {
      Point z = grid.nodes()[g1[c]];
      double d = psi(t, x, z) - psi(s, x, z);
      acc += grid.weights()[k] * g1w[c] * d * d;
    }
  }
  return std::sqrt(acc);
}

OperatorFamily add_families(const OperatorFamily& a, const OperatorFamily& b) {
  if (a.time_grid() != b.time_grid()) throw PreconditionError("add_families: time grids differ");
  if (a.size() != b.size()) throw PreconditionError("add_families: dimensions differ");
  std::vector<DiscreteOperator> s = a.samples();
  for (std::size_t k = 0; k < s.size(); ++k) s[k].matrix += b.sample(k).matrix;
  return OperatorFamily(a.time_grid(), std::move(s), a.interpolation());
}

}  // namespace evolab::opalg
