#include "evolab/admiss/invariance.hpp"

#include "evolab/error.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evolab::admiss {

namespace {

// from → to, where `to` is generated by from's generator plus the perturbation P (sign irrelevant to ĉ).
InvarianceDirection direction(const evofam::EvolutionFamily& from, const evofam::EvolutionFamily& to,
                              const opalg::OperatorFamily& p, const opalg::ObservationMap& c, double theta, double s,
                              double tau_prime, double c_norm, const opalg::ProbeOptions& opts) {
  InvarianceDirection d;
  d.gamma_from = gamma_evolution(from, c, theta, s, tau_prime, opts);
  d.gamma_to = gamma_evolution(to, c, theta, s, tau_prime, opts);
  opalg::ProbeOptions ko = opts;
  ko.probes = std::min(opts.probes, 8);
  ko.ascent_iterations = std::min(opts.ascent_iterations, 25);
  d.kappa = evofam::mr_constant(to, theta, to.index_of(s), to.index_of(tau_prime), ko).value;
  d.c_hat = perturb::h2_constant(p, from, theta, s, tau_prime, opts).c_hat.front();
  d.c_norm = c_norm;
  d.delta = std::pow(std::pow(2.0 * d.kappa * d.c_hat * c_norm, theta) + std::pow(2.0 * d.gamma_from.gamma_hat, theta),
                     1.0 / theta);
  d.verdict = d.gamma_to.gamma_hat <= d.delta;
  return d;
}

}  // namespace

InvarianceReport invariance_report(const perturb::PerturbedPair& pair, const opalg::ObservationMap& c, double theta,
                                   double mu, double s, double tau_prime, const opalg::ProbeOptions& opts) {
  if (!(theta > 1.0) || theta > mu) {
    std::ostringstream msg;
    msg << "invariance: theta = " << theta << " outside the admissible range (1, mu] = (1, " << mu << "]";
    throw PreconditionError(msg.str());
  }
  if (!pair.u || !pair.v_direct || !pair.p) throw PreconditionError("invariance: incomplete perturbed pair");
  const auto& u = *pair.u;
  const auto& tg = u.time_grid();
  if (tau_prime < 0) tau_prime = tg[tg.size() - 2];
  InvarianceReport r;
  r.theta = theta, r.mu = mu, r.s = s, r.tau_prime = tau_prime;
  const double c_norm = opalg::dy_operator_norm(c, u.norms());
  r.forward = direction(u, *pair.v_direct, *pair.p, c, theta, s, tau_prime, c_norm, opts);
  r.converse = direction(*pair.v_direct, u, *pair.p, c, theta, s, tau_prime, c_norm, opts);
  r.verdict = r.forward.verdict && r.converse.verdict;
  return r;
}

}  // namespace evolab::admiss
