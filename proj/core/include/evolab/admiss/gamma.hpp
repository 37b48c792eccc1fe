#pragma once

#include "evolab/evofam/evolution.hpp"
#include "evolab/opalg/estimate.hpp"
#include "evolab/opalg/operator.hpp"

#include <string>
#include <utility>
#include <vector>

namespace evolab::admiss {

struct AdmissibilityReport {
  double theta = 2.0;
  double s = 0.0;
  double tau_prime = 0.0;
  double gamma_hat = 0.0;
  std::string method;  // "svd-exact" (θ = 2, Hilbert Y) or "probe-lower-bound"
  int probes = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> refinement_history;  // (Δt, γ̂)
  double sliver = 0.0;  // power-law estimate of the omitted first cell, (∫_s^{s+Δt} ...)^{1/θ}
  double dt = 0.0;
  long n = 0;
};

/// Probe settings for θ ≠ 2; 64 probes by default.
opalg::ProbeOptions default_gamma_probes(std::uint64_t seed = 0);

/// (∫_0^α ‖C e^{-tA} x‖^θ dt)^{1/θ} ≤ γ‖x‖, by composite 8-point Gauss–Legendre on panels
/// graded geometrically toward t = 0, with the expm oracle at every node.
AdmissibilityReport gamma_semigroup(const opalg::DiscreteOperator& op, const opalg::ObservationMap& c, double theta,
                                    double alpha_horizon, const opalg::ProbeOptions& opts = default_gamma_probes());

/// (Σ_{s<k≤τ'} h_{k-1} ‖C U(t_k,s)x‖^θ)^{1/θ} ≤ γ‖x‖ (open at t = s).
AdmissibilityReport gamma_evolution(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                                    double s, double tau_prime,
                                    const opalg::ProbeOptions& opts = default_gamma_probes());

/// C(t) varying in time: one observation map per stepper node.
AdmissibilityReport timevarying_gamma(const evofam::EvolutionFamily& u, const std::vector<opalg::ObservationMap>& c,
                                      double theta, double s, double tau_prime,
                                      const opalg::ProbeOptions& opts = default_gamma_probes());

struct GlobalReport {
  AdmissibilityReport report;          // sup over anchors of γ(s, τ)
  std::vector<double> anchors;         // s values
  std::vector<double> gamma_to_end;    // γ(s, τ) per anchor
  // Splitting check γ(s,τ)^θ ≤ γ(s,s+α)^θ + (c‖C‖)^θ / α^{θ/θ'} on anchors with s + α ≤ τ.
  double alpha = 0.0;
  double c_constant = 0.0;  // MR constant used for c
  double c_norm = 0.0;      // ‖C‖_{D→Y}
  std::vector<double> split_anchors;
  std::vector<double> split_lhs;  // γ(s,τ)^θ
  std::vector<double> split_rhs;
  double split_slack = 0.05;
  bool split_holds = true;
};

/// Global constant sup_s γ(s, τ) over `anchors` evenly spread anchor nodes (0 = every node, θ = 2
/// only) plus the splitting check with window α and MR constant `mr_constant` (measured by the caller).
GlobalReport gamma_global(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                          double alpha, double mr_constant, int anchors = 0,
                          const opalg::ProbeOptions& opts = default_gamma_probes());

struct FrozenComparison {
  AdmissibilityReport evolution;
  std::vector<double> frozen_times;
  std::vector<double> frozen_gamma;
  double frozen_max = 0.0;
  double ratio = 0.0;  // evolution / frozen_max (1 when both are 0)
};

/// γ for U on [0, horizon] against max over frozen times t of γ for the semigroup of A(t).
FrozenComparison frozen_vs_evolution(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                                     double horizon, int frozen_count = 5,
                                     const opalg::ProbeOptions& opts = default_gamma_probes());

}  // namespace evolab::admiss
