#include "evolab/models/convergence.hpp"

#include "evolab/admiss/gamma.hpp"
#include "evolab/admiss/transfer.hpp"
#include "evolab/error.hpp"
#include "evolab/models/models.hpp"
#include "evolab/opalg/norms.hpp"

#include <chrono>
#include <cmath>

namespace evolab::models {

namespace {

double order(double prev, double cur) { return prev > 0 && cur > 0 ? std::log2(prev / cur) : 0.0; }

}  // namespace

ConvergenceReport convergence_study(const ModelConfig& cfg, int rungs, double budget_seconds, bool refine_space) {
  if (rungs < 3) throw PreconditionError("convergence_study: need at least 3 rungs (got " + std::to_string(rungs) + ")");
  const auto start = std::chrono::steady_clock::now();
  const bool scalar = cfg.kind == ModelKind::Scalar;
  ConvergenceReport r;
  r.model = to_string(cfg.kind);
  r.scheme = cfg.scheme;
  r.requested = rungs;
  // τ' must be a node of every rung: all grids are refinements of τ/64.
  r.tau_prime = scalar ? cfg.tau : cfg.tau * (1.0 - 1.0 / 64);
  const double dt0 = cfg.tau / 64;
  opalg::ProbeOptions probe = admiss::default_gamma_probes(cfg.seed);
  probe.probes = cfg.probes;

  for (int k = 0; k < rungs; ++k) {
    std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
    if (budget_seconds > 0 && spent.count() > budget_seconds) {
      r.complete = false;
      break;
    }
    ModelConfig c = cfg;
    c.dt = std::ldexp(dt0, -k);
    if (refine_space && !scalar) c.n = (cfg.n - 1) * (1 << k) + 1;
    Bundle b = build_bundle(c);
    const auto a0 = b.a->operator_at(0.0);
    ConvergenceRung rung;
    rung.dt = c.dt;
    rung.n = static_cast<int>(a0.size());
    rung.propagator_error = evofam::propagator_ladder(a0, cfg.tau, c.dt, 1, b.scheme).front().error;
    rung.discrepancy = perturb::consistency_ladder(b.a, b.p, c.dt, 1, b.scheme).front().error;
    rung.duhamel_nodes = 64 << k;
    Vector x = opalg::d_probe_basis(*a0.norms).col(0);
    rung.duhamel_residual =
        admiss::duhamel_frozen_residual(a0, b.a->operator_at(b.a->tau()), x, {cfg.tau}, rung.duhamel_nodes);
    auto u = evofam::propagate(b.a, b.t_grid, b.scheme);
    rung.gamma = admiss::gamma_evolution(u, b.c, c.theta, 0.0, r.tau_prime, probe).gamma_hat;
    if (!r.rungs.empty()) {
      const auto& prev = r.rungs.back();
      rung.propagator_order = order(prev.propagator_error, rung.propagator_error);
      rung.discrepancy_order = order(prev.discrepancy, rung.discrepancy);
      rung.duhamel_order = order(prev.duhamel_residual, rung.duhamel_residual);
      rung.gamma_drift = prev.gamma > 0 ? std::abs(rung.gamma - prev.gamma) / prev.gamma : 0.0;
    }
    r.rungs.push_back(rung);
  }
  return r;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["scheme"] = r.scheme;
  j["requested"] = r.requested;
  j["tau_prime"] = r.tau_prime;
  j["complete"] = r.complete;
  j["rungs"] = nlohmann::json::array();
  for (const auto& g : r.rungs)
    j["rungs"].push_back({{"dt", g.dt},
                          {"n", g.n},
                          {"propagator_error", g.propagator_error},
                          {"propagator_order", g.propagator_order},
                          {"discrepancy", g.discrepancy},
                          {"discrepancy_order", g.discrepancy_order},
                          {"duhamel_nodes", g.duhamel_nodes},
                          {"duhamel_residual", g.duhamel_residual},
                          {"duhamel_order", g.duhamel_order},
                          {"gamma", g.gamma},
                          {"gamma_drift", g.gamma_drift}});
  return j;
}

}  // namespace evolab::models
