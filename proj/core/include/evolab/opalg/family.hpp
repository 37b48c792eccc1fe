#pragma once

#include "evolab/linalg.hpp"
#include "evolab/opalg/operator.hpp"

#include <optional>
#include <vector>

namespace evolab::opalg {

enum class Interpolation { PiecewiseConstantLeft, Linear };

/// Estimated relative ν-Dini modulus of a family:
///   ‖A(t)x − A(s)x‖ ≤ ω(|t−s|)‖x‖_D + η‖x‖.
struct DiniModulus {
  std::vector<double> deltas;     // increasing lags
  std::vector<double> omega_hat;  // non-decreasing in lag
  double eta_hat = 0.0;
  double nu = 2.0;
  double dini_integral = 0.0;     // midpoint rule for ∫ (ω(t)/t)^ν dt over [deltas.front(), τ]
  double tail_exponent = 0.0;     // fitted s in (ω(t)/t)^ν ~ t^{-s} near the smallest lag
  bool divergent = false;         // tail_exponent ≥ 1: the integral does not converge at 0
};

/// t ↦ A(t) sampled on a time grid over [0, τ].
class OperatorFamily {
 public:
  OperatorFamily(std::vector<double> time_grid, std::vector<DiscreteOperator> samples,
                 Interpolation interpolation = Interpolation::Linear);

  /// t ↦ A constant on [0, tau].
  static OperatorFamily constant(const DiscreteOperator& op, double tau);

  const std::vector<double>& time_grid() const { return time_grid_; }
  const std::vector<DiscreteOperator>& samples() const { return samples_; }
  const DiscreteOperator& sample(std::size_t k) const { return samples_[k]; }
  Interpolation interpolation() const { return interpolation_; }
  double tau() const { return time_grid_.back(); }
  Index size() const { return samples_.front().size(); }
  const NormSpec& norms() const { return *samples_.front().norms; }
  NormSpecPtr norms_ptr() const { return samples_.front().norms; }

  /// Interpolated matrix at time t (clamped to [0, τ]).
  Matrix at(double t) const;
  DiscreteOperator operator_at(double t) const;

  const std::optional<DiniModulus>& dini() const { return dini_; }
  void set_dini(DiniModulus d) { dini_ = std::move(d); }

  /// Same time grid and samples scaled by `lambda`.
  OperatorFamily scaled(double lambda) const;

 private:
  std::vector<double> time_grid_;
  std::vector<DiscreteOperator> samples_;
  Interpolation interpolation_;
  std::optional<DiniModulus> dini_;
};

/// Strictly increasing grid 0 = t_0 < ... < t_K = tau with K = round(tau/dt).
std::vector<double> uniform_time_grid(double tau, double dt);

}  // namespace evolab::opalg
