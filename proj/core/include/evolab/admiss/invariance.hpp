#pragma once

#include "evolab/admiss/gamma.hpp"
#include "evolab/perturb/perturb.hpp"

namespace evolab::admiss {

/// One direction of the invariance bound: from the known family (γ_from) to the perturbed one.
struct InvarianceDirection {
  AdmissibilityReport gamma_from;
  AdmissibilityReport gamma_to;
  double kappa = 0.0;   // MR constant of the perturbed family on [s, τ']
  double c_hat = 0.0;   // ĉ of the perturbation along the known family, exponent θ, x ∈ D
  double c_norm = 0.0;  // ‖C‖_{D→Y}
  double delta = 0.0;   // ((2 κ̂ ĉ ‖C‖)^θ + (2 γ_from)^θ)^{1/θ}
  bool verdict = false; // γ_to ≤ δ
};

struct InvarianceReport {
  double theta = 2.0, mu = 2.0;
  double s = 0.0, tau_prime = 0.0;
  InvarianceDirection forward;   // A → A + P
  InvarianceDirection converse;  // A + P → A, perturbation −P
  bool verdict = false;
};

/// Both directions on [s, τ']; τ' < 0 selects the penultimate node. Rejects θ outside (1, μ].
InvarianceReport invariance_report(const perturb::PerturbedPair& pair, const opalg::ObservationMap& c, double theta,
                                   double mu, double s = 0.0, double tau_prime = -1.0,
                                   const opalg::ProbeOptions& opts = default_gamma_probes());

}  // namespace evolab::admiss
