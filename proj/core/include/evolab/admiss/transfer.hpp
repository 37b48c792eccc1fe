#pragma once

#include "evolab/admiss/gamma.hpp"
#include "evolab/opalg/family.hpp"

#include <vector>

namespace evolab::admiss {

/// max over t ∈ t_grid of the X-norm residual of
///   e^{-tA1}x = e^{-tA0}x + ∫_0^t e^{-(t-r)A0}(A0 − A1)e^{-rA1}x dr
/// with the composite trapezoid on `r_nodes` cells (Horner accumulation of the matrix powers).
double duhamel_frozen_residual(const opalg::DiscreteOperator& a0, const opalg::DiscreteOperator& a1, const Vector& x,
                               const std::vector<double>& t_grid, int r_nodes = 1024);

/// k_τ: θ-th power of the L^θ(0,τ;X) → L^θ(0,τ;Y) gain of g ↦ C ∫_0^t e^{-(t-r)A}g(r)dr,
/// right-endpoint rule on `nodes` uniform cells. Probe lower bound (power iteration for θ = 2).
double convolution_gain(const opalg::DiscreteOperator& a, const opalg::ObservationMap& c, double theta, double tau,
                        int nodes, const opalg::ProbeOptions& opts);

/// c_τ = (∫_0^τ ‖e^{-rA}‖^θ dr)^{1/θ}.
double semigroup_lp_bound(const opalg::DiscreteOperator& a, double theta, double tau);

struct TrBetaReport {
  double theta = 0.0, beta = 0.0, tau = 0.0;
  double m = 0.0, eta = 0.0;     // fitted ‖(A1−A0)x‖ ≤ M‖x‖_{Tr_β} + η‖x‖
  double fit_residual = 0.0;     // on validation probes
  double gamma_a0 = 0.0, gamma_a1 = 0.0;
  double k_tau = 0.0;
  double k_trace = 0.0;          // sup_r r^{(β−1)/β} ‖e^{-rA1}‖_{X→Tr_β}
  double c_tau = 0.0;
  double r_integral = 0.0;       // ∫_0^τ r^{−θ(β−1)/β} dr
  double majorant = 0.0;         // γ(A0) + (k_τ[(2MK)^θ I_r + (2η c_τ)^θ])^{1/θ}
  bool finite = false;
  bool holds = false;            // γ(A1) ≤ 1.1 · majorant
};

/// Transfer of admissibility between frozen generators under a Tr_β-relative bound.
/// Rejects θ ≥ β/(β−1).
TrBetaReport tr_beta_transfer(const opalg::DiscreteOperator& a0, const opalg::DiscreteOperator& a1,
                              const opalg::ObservationMap& c, double theta, double beta, double tau = 1.0,
                              const opalg::ProbeOptions& opts = default_gamma_probes());

struct BRelativeReport {
  double theta = 0.0;
  double m = 0.0, eta = 0.0;
  double fit_residual = 0.0;
  double tolerance = 1e-3;
  bool satisfied = false;        // fit residual within tolerance
  double gamma_b = 0.0;          // max over frozen times
  double gamma_c0 = 0.0, gamma_c1 = 0.0;  // γ_C for A(t0), A(t1)
  double k_tau = 0.0, c_tau = 0.0;
  double bound = 0.0;            // γ_C(A(t0)) + k_τ^{1/θ}(M γ_B + η c_τ)
  bool holds = false;            // satisfied and γ_C(A(t1)) ≤ 1.1 · bound
  std::vector<double> pair_lags;   // |t − s| of the measured sample pairs
  std::vector<double> pair_slopes; // max_x ‖(A(t)−A(s))x‖ / ‖Bx‖ per pair
};

/// Fits ‖A(t)x − A(s)x‖ ≤ M‖Bx‖ + η‖x‖ on probes over sampled pairs and, when the fit holds,
/// compares γ_C(A(τ)) with the bound built from γ_C(A(0)) and the measured constants.
BRelativeReport b_relative_transfer(const opalg::OperatorFamily& a, const opalg::ObservationMap& b,
                                    const opalg::ObservationMap& c, double theta,
                                    const opalg::ProbeOptions& opts = default_gamma_probes());

}  // namespace evolab::admiss
