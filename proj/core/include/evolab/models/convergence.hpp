#pragma once

#include "evolab/models/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace evolab::models {

struct ConvergenceRung {
  double dt = 0.0;
  int n = 0;
  double propagator_error = 0.0, propagator_order = 0.0;  // frozen A(0) against the expm oracle
  double discrepancy = 0.0, discrepancy_order = 0.0;      // Volterra vs direct V
  int duhamel_nodes = 0;
  double duhamel_residual = 0.0, duhamel_order = 0.0;     // A(0) vs A(τ), quadrature cells = duhamel_nodes
  double gamma = 0.0, gamma_drift = 0.0;                  // γ̂ for U on [0, τ'] and its change from the previous rung
};

struct ConvergenceReport {
  std::string model;
  std::string scheme;
  int requested = 0;
  double tau_prime = 0.0;
  std::vector<ConvergenceRung> rungs;
  bool complete = true;  // false when the wall-clock budget stopped the ladder early
};

/// Halves Δt per rung starting from τ/64 (and doubles the interior resolution when
/// `refine_space`). `budget_seconds` ≤ 0 means no cap. Rejects rungs < 3.
ConvergenceReport convergence_study(const ModelConfig& cfg, int rungs, double budget_seconds = 0.0,
                                    bool refine_space = false);

nlohmann::json to_json(const ConvergenceReport& r);

}  // namespace evolab::models
