#pragma once

#include "evolab/linalg.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace evolab::opalg {

/// Discrete L^p(nodes; X_W): ‖g‖ = (Σ_k τ_k ‖g_k‖_W^p)^{1/p} with ‖v‖_W = sqrt(vᵀ W v).
/// A single node with τ = 1 is plain X.
struct BochnerSpace {
  std::vector<double> time_weights;
  Vector space_weights;
  double p = 2.0;

  std::size_t nodes() const { return time_weights.size(); }
  Index dim() const { return space_weights.size(); }
  double norm(const Trajectory& g) const;
  /// ∂‖y‖/∂y in Euclidean coordinates; zero at y = 0.
  Trajectory gradient(const Trajectory& y) const;
  /// The unit vector g maximizing Σ_k z_k·g_k.
  Trajectory dual_direction(const Trajectory& z) const;
  Trajectory zeros() const;
};

/// Linear map from one Bochner space into a finite sum of Bochner spaces. The ratio being
/// maximized is Σ_c ‖(Tg)_c‖ / ‖g‖; `adjoint` is the Euclidean transpose of `forward`.
struct LinearTrajectoryMap {
  BochnerSpace input;
  std::vector<BochnerSpace> outputs;
  std::function<std::vector<Trajectory>(const Trajectory&)> forward;
  std::function<Trajectory(const std::vector<Trajectory>&)> adjoint;
};

struct ProbeOptions {
  int probes = 16;
  std::uint64_t seed = 0;
  int ascent_iterations = 40;
  double tolerance = 1e-12;
  /// Time-smooth initial probes (few cosine modes in time) instead of white noise.
  bool smooth = false;
  /// W-orthonormal columns restricting single-node inputs (x ∈ span). Empty = whole space.
  Matrix subspace;
};

struct RatioEstimate {
  double value = 0.0;
  std::string method;             // "svd-exact" or "probe-lower-bound"
  int probes = 0;
  int iterations = 0;
  std::vector<double> running_max;  // after each probe; non-decreasing
  Trajectory maximizer;
};

/// Probe maximization with monotone ascent g ← dual(∇F(g)). F is convex and positively
/// homogeneous, so each step can only increase the ratio; the result is a certified lower
/// bound of the operator norm. Probe i depends only on (seed, i), so the estimate is
/// non-decreasing in the probe count.
RatioEstimate maximize_ratio(const LinearTrajectoryMap& map, const ProbeOptions& opts);

/// sup_x sqrt(xᵀ G x) / ‖x‖_W over span(basis) (whole space when basis is empty).
/// G is a Gram matrix in Euclidean coordinates.
double gram_gain(const Matrix& gram, const Vector& weights, const Matrix& basis);

/// Fit of a_i ≤ M b_i + η n_i over probes; minimizes M·median(b/n) + η on the LP vertices.
struct RelativeBoundFit {
  double m = 0.0;
  double eta = 0.0;
  bool feasible = true;
};
RelativeBoundFit fit_relative_bound(std::span<const double> a, std::span<const double> b,
                                    std::span<const double> n);

/// max_i (a_i − M b_i − η n_i)_+ / a_i over a validation set.
double relative_bound_residual(const RelativeBoundFit& fit, std::span<const double> a,
                               std::span<const double> b, std::span<const double> n);

/// Deterministic standard-normal vector for (seed, stream).
Vector gaussian_vector(Index n, std::uint64_t seed, std::uint64_t stream);

}  // namespace evolab::opalg
