#pragma once

#include "evolab/evofam/evolution.hpp"
#include "evolab/opalg/estimate.hpp"

#include <vector>

namespace evolab::evofam {

/// Discrete MR_p norm of a trajectory on the stepper nodes a..b. All L^p norms use the
/// right-endpoint rule: node k carries weight h_{k-1}, the anchor node a is excluded.
/// The derivative is the backward difference quotient (u_k − u_{k-1}) / h_{k-1}.
struct MRSolution {
  Trajectory trajectory;  // u_a .. u_b
  std::vector<double> times;
  double deriv_lp = 0.0;
  double alu_lp = 0.0;
  double u_lp = 0.0;
  double mr_norm = 0.0;
  double p = 2.0;
};

/// MR components of a given trajectory u_a..u_b (u_a may be non-zero).
MRSolution mr_components(const EvolutionFamily& u, Trajectory traj, std::size_t a, double p);

/// u̇ + A u = f, u(t_a) = 0 on [t_a, t_b]: u_{k+1} = S_k u_k + h_k R_k f_{k+1}.
/// `f` holds one vector per node a..b (f[0] is unused by the scheme).
MRSolution solve_nonhomogeneous(const EvolutionFamily& u, const Trajectory& f, std::size_t a, std::size_t b, double p);

/// Convenience: builds the stepper first.
MRSolution solve_nonhomogeneous(std::shared_ptr<const opalg::OperatorFamily> family, const std::vector<double>& t_grid,
                                const Trajectory& f, double a, double b, double p, Scheme scheme);

struct ConstantEstimate {
  double value = 0.0;
  std::string method;
  int probes = 0;
  std::vector<double> running_max;
  std::uint64_t seed = 0;
};

/// κ̂ = max over probes f of ‖u‖_{MR_p(a,b)} / ‖f‖_{L^p(a,b;X)}: smooth random sources, each
/// refined by monotone ascent. A lower bound of the discrete MR constant, non-decreasing in
/// the probe count.
ConstantEstimate mr_constant(const EvolutionFamily& u, double p, std::size_t a, std::size_t b,
                             const opalg::ProbeOptions& opts);

/// M̂ = max over unit x of ‖t ↦ t U(t,0)x‖_{MR_q(0,τ)}, by probes with monotone ascent.
ConstantEstimate smoothing_constant(const EvolutionFamily& u, double q, const opalg::ProbeOptions& opts);

/// The linear map f ↦ (u̇, A u, u) on nodes a..b with its Euclidean adjoint.
opalg::LinearTrajectoryMap mr_map(const EvolutionFamily& u, double p, std::size_t a, std::size_t b);

/// x ↦ (Out_k U(t_k, t_s) x)_{k = s+1..end} into L^θ(nodes; Y) with right-endpoint weights
/// h_{k-1}; single-node input with the X weights. `out_at(k)` is read once per node.
opalg::LinearTrajectoryMap observed_map(const EvolutionFamily& u, std::size_t s, std::size_t end,
                                        const std::function<Matrix(std::size_t)>& out_at, const Vector& y_weights,
                                        double theta);

}  // namespace evolab::evofam
