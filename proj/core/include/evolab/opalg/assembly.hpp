#pragma once

#include "evolab/opalg/family.hpp"
#include "evolab/opalg/grid.hpp"
#include "evolab/opalg/operator.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>

namespace evolab::opalg {

/// a_ij(t, x); only the leading dim×dim block is read.
using TensorField = std::function<Eigen::Matrix2d(double t, Point x)>;
using ScalarField = std::function<double(double t, Point x)>;
/// ψ(t, x, z) with x ∈ Ω and z ∈ Γ1.
using KernelField = std::function<double(double t, Point x, Point z)>;
using TimeFunction = std::function<double(double t)>;

/// Result of the sampled ellipticity check a_ij ξ_i ξ_j ≥ β|ξ|².
struct Ellipticity {
  double beta_hat = 0.0;
  double t_min = 0.0;
  Point x_min{};
};

/// Minimum eigenvalue of a(t, x) over time_grid × dof nodes. Throws PreconditionError
/// naming (t, x) when it is not strictly positive somewhere.
Ellipticity check_ellipticity(const Grid& grid, const TensorField& a, const std::vector<double>& time_grid);

/// Centered second-order finite differences for A(t)u = −Σ a_ij ∂_i∂_j u − b0 u on the dofs
/// (Dirichlet nodes eliminated, Neumann nodes by mirror reflection). The D-reference is A(0).
OperatorFamily assemble_variable_heat(std::shared_ptr<const Grid> grid, const TensorField& a,
                                      const ScalarField& b0, const std::vector<double>& time_grid,
                                      Interpolation interpolation = Interpolation::Linear);

/// −Δ with u = 0 on Γ0 and ∂u/∂ν = 0 on Γ1 (ghost-node reflection).
DiscreteOperator assemble_mixed_laplacian(std::shared_ptr<const Grid> grid);

/// B(t)C with (B(t)g)(x) = b(t) ∫_Γ1 ψ(t, x, z) g(z) dz and C the Γ1 trace. The norms
/// of the returned family are `norms` (typically those of the unperturbed operator).
OperatorFamily assemble_nonlocal_perturbation(std::shared_ptr<const Grid> grid, const KernelField& psi,
                                              const TimeFunction& b_of_t,
                                              const std::vector<double>& time_grid, NormSpecPtr norms);

/// The kernel part B(t): Y → X as a dof × Γ1 matrix (no trace applied).
Matrix nonlocal_kernel_matrix(const Grid& grid, const KernelField& psi, double t);

/// ‖ψ(t,·,·) − ψ(s,·,·)‖ in L²(Ω × Γ1), trapezoidal in both variables.
double kernel_distance(const Grid& grid, const KernelField& psi, double t, double s);

/// Samplewise sum of two families on the same grids.
OperatorFamily add_families(const OperatorFamily& a, const OperatorFamily& b);

}  // namespace evolab::opalg
