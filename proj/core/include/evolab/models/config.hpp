#pragma once

#include "evolab/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace evolab::models {

/// Invalid configuration. `line` is 0 when the offending value has no source position.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, int line, const std::string& what);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class ModelKind { HeatPoint, MixedNonlocal, Scalar };
std::string to_string(ModelKind k);

/// Resolved experiment configuration. Defaults are the desk settings of each model.
struct ModelConfig {
  std::string name = "model";
  ModelKind kind = ModelKind::HeatPoint;

  // grid
  int dimension = 1;
  int n = 64;               // nodes per direction, boundary included
  double tau = 1.0;
  double dt = 1.0 / 1024;
  int time_samples = 33;    // coefficient sampling of A(·), P(·)
  std::string scheme = "ie";

  // heat_point: a(t, x) = a0 + a_rate·t, observation at x = c
  double a0 = 1.0, a_rate = 0.5;
  double b0 = 0.0;
  double c_point = 0.5;

  // mixed_nonlocal: ψ(t, x, z) = (1 + psi_rate·t)·x, P(t) = b·𝒜^α
  double psi_rate = 1.0;

  // perturbation (both grid models): P(t) = b_pert · A(t)^α
  double alpha = 0.25;
  double b_pert = 1.0;

  // scalar fixture: u' + a u = 0, P = p
  double a_scalar = 1.0, p_scalar = 0.5;

  // exponents
  double p = 2.0;      // maximal regularity
  double q = 2.0;      // recorded spatial integrability of the continuum model
  double theta = 2.0;  // admissibility
  double mu = 2.0;     // perturbation smallness
  double nu = 2.0;     // Dini exponent

  std::uint64_t seed = 0;
  int probes = 64;
};

/// Parses YAML (nested mappings) or JSON (first non-blank character '{'). Unknown keys,
/// wrong types and out-of-range values raise ConfigError with the line and dotted field.
ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

/// Range checks per model; also run by parse_config.
void validate(const ModelConfig& cfg);

/// Canonical JSON of the resolved values (sorted keys).
nlohmann::json to_json(const ModelConfig& cfg);
/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits. Depends only on resolved values.
std::string config_hash(const ModelConfig& cfg);

}  // namespace evolab::models
