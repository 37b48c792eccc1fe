#pragma once

#include "evolab/evofam/evolution.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/estimate.hpp"
#include "evolab/opalg/family.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evolab::perturb {

/// A^P = A + P samplewise. When both inputs carry Dini moduli on the same lags the sum
/// records ω_A + ω_P and η_A + η_P (the triangle-inequality majorant).
opalg::OperatorFamily perturbed_family(const opalg::OperatorFamily& a, const opalg::OperatorFamily& p);

// Sums weighted by P use P at the left end of each cell and the state at the right end:
//   Σ_{s<k≤end} h_{k-1} ‖P(t_{k-1}) U(t_k, t_s) x‖^μ.
// This is the quantity the implicit-Euler gap identity produces, so the discrete MR and
// contraction chains hold without a quadrature mismatch.

struct H2Report {
  double mu = 2.0;
  std::vector<std::pair<double, double>> intervals;  // (s, τ')
  std::vector<double> c_hat;
  std::vector<double> sliver;  // Δt^{1/μ}‖P(s)x*‖ for the maximizer: the omitted first cell
  std::string method;          // "svd-exact" or "probe-lower-bound"
  int probes = 0;
  std::uint64_t seed = 0;
};

/// ĉ on [s, τ'] over probes x ∈ D (lowest 2/3 of the reference modes). τ' ≥ τ is rejected.
H2Report h2_constant(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, double mu, double s,
                     double tau_prime, const opalg::ProbeOptions& opts);

/// ĉ for every τ' of `tau_primes` (ascending) from one anchor.
H2Report h2_profile(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, double mu, double s,
                    const std::vector<double>& tau_primes, const opalg::ProbeOptions& opts);

/// ĉ(t_r, t_end) over the whole space X for every anchor r < end (μ = 2, Gram sweep).
std::vector<double> h2_full_space_profile(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u,
                                          std::size_t end);

/// V(t_j, t_i) for report nodes i ≤ j, from
///   V(t,s) = U(t,s) − ∫_s^t V(t,σ) P(σ) U(σ,s) dσ
/// with composite-trapezoid memory quadrature on the full stepper grid. For each target t_j
/// the anchor marches backward from t_j, reusing the already computed V(t_j, σ), σ > s.
class VolterraTable {
 public:
  VolterraTable(std::vector<std::size_t> report_nodes, std::vector<std::vector<Matrix>> v)
      : nodes_(std::move(report_nodes)), v_(std::move(v)) {}
  const std::vector<std::size_t>& report_nodes() const { return nodes_; }
  /// V(t_{nodes[j]}, t_{nodes[i]}) for report positions i ≤ j.
  const Matrix& at(std::size_t j, std::size_t i) const { return v_[j][i]; }

 private:
  std::vector<std::size_t> nodes_;
  std::vector<std::vector<Matrix>> v_;
};

/// Report nodes every `stride` steps (stride 0: K/8, at least 1), always including 0 and K.
VolterraTable volterra_solve(const evofam::EvolutionFamily& u, const opalg::OperatorFamily& p, std::size_t stride = 0);

struct PerturbedPair {
  std::shared_ptr<const evofam::EvolutionFamily> u;
  std::shared_ptr<const evofam::EvolutionFamily> v_direct;
  std::shared_ptr<const opalg::OperatorFamily> p;
  std::optional<VolterraTable> v_volterra;
  double discrepancy = 0.0;
};

/// Builds U (for A), V_direct (for A + P) and, unless `with_volterra` is false, the Volterra
/// table and its discrepancy.
PerturbedPair make_perturbed_pair(std::shared_ptr<const opalg::OperatorFamily> a,
                                  std::shared_ptr<const opalg::OperatorFamily> p, const std::vector<double>& t_grid,
                                  evofam::Scheme scheme, bool with_volterra = true, std::size_t stride = 0);

/// max over report pairs of ‖V_volterra − V_direct‖_X.
double perturbation_consistency(const PerturbedPair& pair);

/// Discrepancy over `rungs` halvings of dt0 on a fixed report sub-grid (τ/8), with orders.
std::vector<evofam::LadderRung> consistency_ladder(std::shared_ptr<const opalg::OperatorFamily> a,
                                                   std::shared_ptr<const opalg::OperatorFamily> p, double dt0,
                                                   int rungs, evofam::Scheme scheme);

struct ContractionReport {
  double a = 0.0, b = 0.0, q = 2.0;
  std::vector<double> lengths;  // nested [a, a+L]
  std::vector<double> norms;    // measured ‖f ↦ P ∫U f‖ on each
  std::vector<double> bounds;   // L^{1/q'} · max_r ĉ(r, a+L)
  double norm = 0.0;            // on [a, b]
  double bound = 0.0;
  double critical_length = 0.0;  // largest tested L with norm < 1
  bool all_below_one = false;
};

/// Norm of f ↦ (P(t_{k-1}) u_k)_k, u the zero-start MR solution of u̇ + A u = f, on nested
/// intervals [a, a+L]. The bound is the Hölder/Fubini chain with full-space ĉ (q = 2).
ContractionReport neumann_contraction(const evofam::EvolutionFamily& u, const opalg::OperatorFamily& p, double a,
                                      double b, double q, const opalg::ProbeOptions& opts, int lengths = 6);

struct GapReport {
  double gap = 0.0;    // max over probes of ‖V(·,s)x − U(·,s)x‖_{MR_q(s,τ)} / ‖x‖
  double deriv = 0.0, alu = 0.0, u = 0.0;  // components at the maximizer
  double kappa = 0.0;  // MR constant of A + P on [s, τ], gap sources included as probes
  double c_hat = 0.0;  // ĉ of P along U on [s, τ] (x ∈ D)
  double product = 0.0;
  bool holds = false;  // gap ≤ κ̂ ĉ
};

/// The gap V − U solves the A+P problem with source f_{k+1} = −P(t_k) U(t_{k+1}, s)x.
GapReport mr_gap_bound(const PerturbedPair& pair, double q, double s, const opalg::ProbeOptions& opts);

}  // namespace evolab::perturb
