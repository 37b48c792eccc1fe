#pragma once

#include "evolab/admiss/gamma.hpp"
#include "evolab/admiss/invariance.hpp"
#include "evolab/admiss/transfer.hpp"
#include "evolab/models/config.hpp"
#include "evolab/opalg/assembly.hpp"
#include "evolab/perturb/perturb.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evolab::models {

/// Everything a pipeline needs: A(·), P(·), the observation and the stepping grid.
struct Bundle {
  ModelConfig config;
  std::shared_ptr<const opalg::Grid> grid;  // null for the scalar fixture
  std::shared_ptr<const opalg::OperatorFamily> a, p;
  opalg::ObservationMap c;
  std::optional<opalg::ObservationMap> b;   // B of the B-relative bound (mixed model: the Γ1 trace)
  std::optional<opalg::KernelField> psi;
  std::optional<opalg::Ellipticity> ellipticity;
  std::vector<double> t_grid;
  double tau_prime = 0.0;                   // right end of every admissibility window
  evofam::Scheme scheme = evofam::Scheme::ImplicitEuler;
};

Bundle heat_point_bundle(const ModelConfig& cfg);
Bundle mixed_nonlocal_bundle(const ModelConfig& cfg);
/// u' + a u = 0 perturbed by the constant p. The stepping grid runs to 2·horizon so that
/// windows ending at the horizon lie strictly inside it.
Bundle scalar_bundle(const ModelConfig& cfg);
Bundle build_bundle(const ModelConfig& cfg);

/// One checked inequality: pass iff lhs `relation` rhs.
struct Verdict {
  std::string name;
  bool pass = false;
  double lhs = 0.0, rhs = 0.0;
  std::string relation;  // "<=", "<", ">"
  std::string detail;
};

/// Measured value against its closed form.
struct OracleRow {
  std::string quantity;
  double measured = 0.0, exact = 0.0;
  double error() const;
};

struct PipelineOptions {
  bool volterra = true;
  std::size_t volterra_stride = 0;
  int jobs = 1;
};

struct ExperimentReport {
  std::string model;
  ModelConfig config;
  opalg::DiniModulus dini;
  std::optional<opalg::Ellipticity> ellipticity;
  double volterra_discrepancy = -1.0;  // negative when skipped
  perturb::H2Report h2;
  admiss::InvarianceReport invariance;
  perturb::ContractionReport contraction;
  perturb::GapReport gap;
  std::optional<admiss::GlobalReport> global;
  std::optional<admiss::FrozenComparison> frozen;
  std::optional<admiss::BRelativeReport> b_relative;
  std::vector<OracleRow> oracle;
  /// t_k, ‖C U(t_k,0)x‖^θ, ‖C V(t_k,0)x‖^θ for x the lowest reference mode.
  std::vector<std::array<double, 3>> integrand;
  std::vector<Verdict> verdicts;
  std::map<std::string, double> seconds;

  const Verdict* verdict(const std::string& name) const;
  bool all_pass() const;
};

/// Runs the full pipeline: Dini diagnostic, U and V, Volterra consistency, ĉ, invariance in
/// both directions, contraction, MR gap, plus the model-specific experiments.
ExperimentReport run_pipeline(const Bundle& bundle, const PipelineOptions& opts = {});

ExperimentReport heat_point_model(const ModelConfig& cfg, const PipelineOptions& opts = {});
ExperimentReport mixed_nonlocal_model(const ModelConfig& cfg, const PipelineOptions& opts = {});
ExperimentReport scalar_fixture(double a, double p, double horizon, const PipelineOptions& opts = {});

nlohmann::json to_json(const ExperimentReport& r);

}  // namespace evolab::models
