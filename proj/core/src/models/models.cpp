#include "evolab/models/models.hpp"

#include "evolab/error.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/dini.hpp"
#include "evolab/opalg/fractional.hpp"
#include "evolab/opalg/norms.hpp"
#include "evolab/opalg/serialize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace evolab::models {

constexpr double kInf = std::numeric_limits<double>::infinity();

namespace {

std::vector<double> sample_times(const ModelConfig& c) { return opalg::uniform_time_grid(c.tau, c.tau / (c.time_samples - 1)); }

std::shared_ptr<const opalg::OperatorFamily> powered(const opalg::OperatorFamily& a, double alpha, double b) {
  std::vector<opalg::DiscreteOperator> s;
  for (const auto& op : a.samples()) {
    auto f = opalg::fractional_power(op, alpha);
    f.matrix *= b;
    s.push_back(std::move(f));
  }
  return std::make_shared<const opalg::OperatorFamily>(a.time_grid(), std::move(s), a.interpolation());
}

void finish(Bundle& b, double tau) {
  b.t_grid = opalg::uniform_time_grid(tau, b.config.dt);
  b.tau_prime = b.t_grid[b.t_grid.size() - 2];
  b.scheme = evofam::scheme_from_string(b.config.scheme);
}

// ((1 − e^{−e r h}) / (e r))^{1/e}: the L^e(0,h) norm of t ↦ e^{−r t}.
double exp_lp(double rate, double e, double h) {
  if (rate == 0) return std::pow(h, 1.0 / e);
  return std::pow(-std::expm1(-e * rate * h) / (e * rate), 1.0 / e);
}

Verdict check(std::string name, double lhs, const std::string& rel, double rhs, std::string detail = {}) {
  bool pass = rel == "<=" ? lhs <= rhs : rel == "<" ? lhs < rhs : lhs > rhs;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) pass = false;
  return {std::move(name), pass, lhs, rhs, rel, std::move(detail)};
}

// Runs independent tasks on up to `jobs` threads; each task owns its output.
void run_tasks(std::vector<std::function<void()>>& tasks, int jobs) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class F>
void timed(std::map<std::string, double>& sink, std::mutex& m, const std::string& key, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0;
  std::lock_guard lock(m);
  sink[key] = d.count();
}

}  // namespace

double OracleRow::error() const { return std::abs(measured - exact); }

const Verdict* ExperimentReport::verdict(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

Bundle heat_point_bundle(const ModelConfig& cfg) {
  validate(cfg);
  if (cfg.kind != ModelKind::HeatPoint) throw PreconditionError("heat_point_bundle: config is not a heat_point model");
  Bundle b;
  b.config = cfg;
  b.grid = std::make_shared<const opalg::Grid>(
      opalg::make_grid(cfg.dimension, {}, cfg.n, opalg::BoundarySpec::all_dirichlet(), true));
  const double a0 = cfg.a0, rate = cfg.a_rate, b0 = cfg.b0;
  opalg::TensorField a = [a0, rate](double t, opalg::Point) {
    return Eigen::Matrix2d((a0 + rate * t) * Eigen::Matrix2d::Identity());
  };
  opalg::ScalarField shift = [b0](double, opalg::Point) { return b0; };
  auto times = sample_times(cfg);
  b.ellipticity = opalg::check_ellipticity(*b.grid, a, times);
  b.a = std::make_shared<const opalg::OperatorFamily>(opalg::assemble_variable_heat(b.grid, a, shift, times));
  b.p = powered(*b.a, cfg.alpha, cfg.b_pert);
  opalg::Point c{cfg.c_point, cfg.dimension == 2 ? cfg.c_point : 0.0};
  b.c = opalg::point_observation(*b.grid, c);
  finish(b, cfg.tau);
  return b;
}

Bundle mixed_nonlocal_bundle(const ModelConfig& cfg) {
  validate(cfg);
  if (cfg.kind != ModelKind::MixedNonlocal)
    throw PreconditionError("mixed_nonlocal_bundle: config is not a mixed_nonlocal model");
  Bundle b;
  b.config = cfg;
  b.grid = std::make_shared<const opalg::Grid>(
      opalg::make_grid(cfg.dimension, {}, cfg.n, opalg::BoundarySpec::dirichlet_on({opalg::Side::Left}), true));
  auto lap = opalg::assemble_mixed_laplacian(b.grid);
  auto times = sample_times(cfg);
  const double rate = cfg.psi_rate;
  opalg::KernelField psi = [rate](double t, opalg::Point x, opalg::Point) { return (1.0 + rate * t) * x.x; };
  b.psi = psi;
  opalg::OperatorFamily base(times, std::vector<opalg::DiscreteOperator>(times.size(), lap));
  auto nonlocal = opalg::assemble_nonlocal_perturbation(b.grid, psi, nullptr, times, lap.norms);
  b.a = std::make_shared<const opalg::OperatorFamily>(opalg::add_families(base, nonlocal));
  auto frac = opalg::fractional_power(lap, cfg.alpha);
  frac.matrix *= cfg.b_pert;
  b.p = std::make_shared<const opalg::OperatorFamily>(times, std::vector<opalg::DiscreteOperator>(times.size(), frac));
  b.c = opalg::boundary_trace(*b.grid);
  b.b = b.c;
  finish(b, cfg.tau);
  return b;
}

Bundle scalar_bundle(const ModelConfig& cfg) {
  validate(cfg);
  if (cfg.kind != ModelKind::Scalar) throw PreconditionError("scalar_bundle: config is not a scalar model");
  Bundle b;
  b.config = cfg;
  auto a = opalg::make_operator(Matrix::Constant(1, 1, cfg.a_scalar));
  opalg::DiscreteOperator p{Matrix::Constant(1, 1, cfg.p_scalar), a.norms, nullptr};
  b.a = std::make_shared<const opalg::OperatorFamily>(opalg::OperatorFamily::constant(a, 2 * cfg.tau));
  b.p = std::make_shared<const opalg::OperatorFamily>(opalg::OperatorFamily::constant(p, 2 * cfg.tau));
  b.c = opalg::identity_observation(*a.norms);
  finish(b, 2 * cfg.tau);
  b.tau_prime = cfg.tau;
  return b;
}

Bundle build_bundle(const ModelConfig& cfg) {
  switch (cfg.kind) {
    case ModelKind::HeatPoint: return heat_point_bundle(cfg);
    case ModelKind::MixedNonlocal: return mixed_nonlocal_bundle(cfg);
    case ModelKind::Scalar: return scalar_bundle(cfg);
  }
  throw PreconditionError("build_bundle: unknown model");
}

ExperimentReport run_pipeline(const Bundle& b, const PipelineOptions& opts) {
  const ModelConfig& cfg = b.config;
  ExperimentReport r;
  r.model = to_string(cfg.kind);
  r.config = cfg;
  r.ellipticity = b.ellipticity;
  std::mutex m;
  opalg::ProbeOptions probe = admiss::default_gamma_probes(cfg.seed);
  probe.probes = cfg.probes;
  const double tp = b.tau_prime;
  // Trajectory-valued maps are Hilbert norms for q = 2: a few power-iteration probes converge.
  opalg::ProbeOptions heavy = probe;
  heavy.probes = std::min(probe.probes, 8);
  heavy.tolerance = 1e-9;

  timed(r.seconds, m, "dini", [&] { r.dini = opalg::dini_modulus(*b.a, cfg.nu, opalg::default_lags(*b.a)); });
  perturb::PerturbedPair pair;
  timed(r.seconds, m, "propagate", [&] {
    pair = perturb::make_perturbed_pair(b.a, b.p, b.t_grid, b.scheme, opts.volterra, opts.volterra_stride);
  });
  if (pair.v_volterra) r.volterra_discrepancy = pair.discrepancy;
  const auto& u = *pair.u;

  std::vector<std::function<void()>> tasks;
  tasks.push_back([&] { timed(r.seconds, m, "h2", [&] { r.h2 = perturb::h2_constant(*b.p, u, cfg.mu, 0.0, tp, probe); }); });
  tasks.push_back([&] {
    timed(r.seconds, m, "invariance", [&] { r.invariance = admiss::invariance_report(pair, b.c, cfg.theta, cfg.mu, 0.0, tp, probe); });
  });
  tasks.push_back([&] {
    timed(r.seconds, m, "contraction", [&] { r.contraction = perturb::neumann_contraction(u, *b.p, 0.0, tp, cfg.p, heavy); });
  });
  tasks.push_back([&] { timed(r.seconds, m, "gap", [&] { r.gap = perturb::mr_gap_bound(pair, cfg.p, 0.0, heavy); }); });
  if (cfg.kind == ModelKind::MixedNonlocal) {
    tasks.push_back([&] {
      timed(r.seconds, m, "frozen", [&] { r.frozen = admiss::frozen_vs_evolution(u, b.c, cfg.theta, tp, 5, probe); });
    });
    tasks.push_back([&] {
      timed(r.seconds, m, "b_relative", [&] { r.b_relative = admiss::b_relative_transfer(*b.a, *b.b, b.c, cfg.theta, probe); });
    });
  }
  run_tasks(tasks, opts.jobs);

  // The splitting bound needs κ̂ of A, measured by the converse direction.
  if (cfg.kind == ModelKind::HeatPoint)
    timed(r.seconds, m, "global", [&] {
      r.global = admiss::gamma_global(u, b.c, cfg.theta, cfg.tau / 4, r.invariance.converse.kappa, 0, probe);
    });

  // Integrand data for the lowest reference mode.
  {
    Vector x = opalg::d_probe_basis(u.norms()).col(0);
    Vector xu = x, xv = x;
    const std::size_t ie = u.index_of(tp);
    for (std::size_t k = 0; k < ie; ++k) {
      xu = u.step(k) * xu;
      xv = pair.v_direct->step(k) * xv;
      r.integrand.push_back({u.time_grid()[k + 1], std::pow(b.c.y_norm(b.c.matrix * xu), cfg.theta),
                             std::pow(b.c.y_norm(b.c.matrix * xv), cfg.theta)});
    }
  }

  if (cfg.kind == ModelKind::Scalar) {
    const double a = cfg.a_scalar, p = cfg.p_scalar, h = cfg.tau;
    const std::size_t ih = u.index_of(h);
    auto unit = std::make_shared<const opalg::OperatorFamily>(
        opalg::OperatorFamily::constant(opalg::DiscreteOperator{Matrix::Ones(1, 1), b.a->norms_ptr(), nullptr}, 2 * h));
    r.oracle = {
        {"U(tau,0)", u.propagator(ih, 0)(0, 0), std::exp(-a * h)},
        {"V(tau,0)", pair.v_direct->propagator(ih, 0)(0, 0), std::exp(-(a + p) * h)},
        {"gamma_U", r.invariance.forward.gamma_from.gamma_hat, exp_lp(a, cfg.theta, h)},
        {"gamma_V", r.invariance.forward.gamma_to.gamma_hat, exp_lp(a + p, cfg.theta, h)},
        {"c_hat", r.h2.c_hat.front(), std::abs(p) * exp_lp(a, cfg.mu, h)},
        {"c_hat_unit", perturb::h2_constant(*unit, u, cfg.mu, 0.0, h, probe).c_hat.front(), exp_lp(a, cfg.mu, h)},
    };
    double worst = 0.0;
    for (const auto& o : r.oracle) worst = std::max(worst, o.error());
    r.verdicts.push_back(check("oracle", worst, "<=", 1e-3, "max |measured - closed form|"));
  }

  r.verdicts.push_back(check("dini", r.dini.divergent ? kInf : r.dini.dini_integral, "<", std::numeric_limits<double>::max(),
                             "Dini integral of the measured modulus"));
  if (r.ellipticity) r.verdicts.push_back(check("ellipticity", r.ellipticity->beta_hat, ">", 0.0, "sampled beta"));
  if (r.volterra_discrepancy >= 0)
    r.verdicts.push_back(check("volterra", r.volterra_discrepancy, "<", 1e-3, "max ||V_volterra - V_direct||"));
  r.verdicts.push_back(check("invariance_forward", r.invariance.forward.gamma_to.gamma_hat, "<=",
                             r.invariance.forward.delta, "gamma_V <= delta"));
  r.verdicts.push_back(check("invariance_converse", r.invariance.converse.gamma_to.gamma_hat, "<=",
                             r.invariance.converse.delta, "gamma_U <= delta (perturbation -P)"));
  {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.contraction.norms.size(); ++i)
      worst = std::max(worst, r.contraction.bounds[i] > 0 ? r.contraction.norms[i] / r.contraction.bounds[i]
                                                          : (r.contraction.norms[i] > 0 ? kInf : 0.0));
    r.verdicts.push_back(check("contraction_bound", worst, "<=", 1.1, "max norm / (L^{1/q'} c_hat)"));
    r.verdicts.push_back(check("contraction_critical", r.contraction.norms.front(), "<", 1.0,
                               "norm on the shortest tested interval"));
  }
  r.verdicts.push_back(check("gap", r.gap.gap, "<=", r.gap.product * (1 + 1e-9), "||V-U||_MR <= kappa c_hat"));
  if (r.global) {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.global->split_lhs.size(); ++i)
      worst = std::max(worst, r.global->split_lhs[i] / r.global->split_rhs[i]);
    r.verdicts.push_back(check("splitting", worst, "<=", 1 + r.global->split_slack,
                               "max gamma_global^theta / (gamma_local^theta + (c|C|)^theta / alpha^{theta/theta'})"));
  }
  if (r.frozen) {
    double ratio = r.frozen->ratio;
    r.verdicts.push_back(check("frozen", std::max(ratio, 1.0 / ratio), "<=", 10.0, "evolution / max frozen gamma"));
  }
  if (r.b_relative)
    r.verdicts.push_back(check("b_relative", r.b_relative->satisfied ? r.b_relative->gamma_c1 : kInf, "<=",
                               1.1 * r.b_relative->bound,
                               r.b_relative->satisfied ? "gamma_C(A(tau)) <= 1.1 bound" : "hypothesis not satisfied"));
  return r;
}

ExperimentReport heat_point_model(const ModelConfig& cfg, const PipelineOptions& opts) {
  return run_pipeline(heat_point_bundle(cfg), opts);
}

ExperimentReport mixed_nonlocal_model(const ModelConfig& cfg, const PipelineOptions& opts) {
  return run_pipeline(mixed_nonlocal_bundle(cfg), opts);
}

ExperimentReport scalar_fixture(double a, double p, double horizon, const PipelineOptions& opts) {
  ModelConfig cfg;
  cfg.name = "scalar";
  cfg.kind = ModelKind::Scalar;
  cfg.a_scalar = a;
  cfg.p_scalar = p;
  cfg.tau = horizon;
  cfg.time_samples = 2;
  return run_pipeline(scalar_bundle(cfg), opts);
}

namespace {

nlohmann::json gamma_json(const admiss::AdmissibilityReport& g) {
  return {{"theta", g.theta}, {"s", g.s},          {"tau_prime", g.tau_prime}, {"gamma_hat", g.gamma_hat},
          {"method", g.method}, {"probes", g.probes}, {"sliver", g.sliver},   {"dt", g.dt},
          {"n", g.n}};
}

nlohmann::json direction_json(const admiss::InvarianceDirection& d) {
  return {{"gamma_from", gamma_json(d.gamma_from)}, {"gamma_to", gamma_json(d.gamma_to)}, {"kappa", d.kappa},
          {"c_hat", d.c_hat}, {"c_norm", d.c_norm}, {"delta", d.delta}, {"verdict", d.verdict}};
}

}  // namespace

nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["config"] = to_json(r.config);
  j["dini"] = {{"deltas", r.dini.deltas},       {"omega_hat", r.dini.omega_hat},
               {"eta_hat", r.dini.eta_hat},     {"nu", r.dini.nu},
               {"integral", r.dini.dini_integral}, {"tail_exponent", r.dini.tail_exponent},
               {"divergent", r.dini.divergent}};
  if (r.ellipticity) j["ellipticity"] = {{"beta_hat", r.ellipticity->beta_hat}, {"t", r.ellipticity->t_min}};
  if (r.volterra_discrepancy >= 0) j["volterra_discrepancy"] = r.volterra_discrepancy;
  j["h2"] = {{"mu", r.h2.mu}, {"c_hat", r.h2.c_hat}, {"sliver", r.h2.sliver}, {"method", r.h2.method}};
  j["invariance"] = {{"theta", r.invariance.theta},
                     {"mu", r.invariance.mu},
                     {"s", r.invariance.s},
                     {"tau_prime", r.invariance.tau_prime},
                     {"forward", direction_json(r.invariance.forward)},
                     {"converse", direction_json(r.invariance.converse)},
                     {"verdict", r.invariance.verdict}};
  j["contraction"] = {{"q", r.contraction.q},         {"lengths", r.contraction.lengths},
                      {"norms", r.contraction.norms}, {"bounds", r.contraction.bounds},
                      {"critical_length", r.contraction.critical_length}};
  j["gap"] = {{"gap", r.gap.gap}, {"kappa", r.gap.kappa}, {"c_hat", r.gap.c_hat}, {"product", r.gap.product}};
  if (r.global)
    j["global"] = {{"gamma_hat", r.global->report.gamma_hat}, {"anchors", r.global->anchors},
                   {"gamma_to_end", r.global->gamma_to_end}, {"alpha", r.global->alpha},
                   {"c_constant", r.global->c_constant}, {"c_norm", r.global->c_norm},
                   {"split_anchors", r.global->split_anchors}, {"split_lhs", r.global->split_lhs},
                   {"split_rhs", r.global->split_rhs}};
  if (r.frozen)
    j["frozen"] = {{"evolution", r.frozen->evolution.gamma_hat}, {"frozen_times", r.frozen->frozen_times},
                   {"frozen_gamma", r.frozen->frozen_gamma}, {"ratio", r.frozen->ratio}};
  if (r.b_relative) {
    const auto& br = *r.b_relative;
    j["b_relative"] = {{"m", br.m},           {"eta", br.eta},         {"fit_residual", br.fit_residual},
                       {"satisfied", br.satisfied}, {"gamma_b", br.gamma_b}, {"gamma_c0", br.gamma_c0},
                       {"gamma_c1", br.gamma_c1}, {"k_tau", br.k_tau},     {"c_tau", br.c_tau},
                       {"bound", br.bound},   {"pair_lags", br.pair_lags}, {"pair_slopes", br.pair_slopes}};
  }
  for (const auto& o : r.oracle)
    j["oracle"].push_back({{"quantity", o.quantity}, {"measured", o.measured}, {"exact", o.exact}, {"error", o.error()}});
  for (const auto& v : r.verdicts)
    j["verdicts"].push_back(
        {{"name", v.name}, {"pass", v.pass}, {"lhs", v.lhs}, {"relation", v.relation}, {"rhs", v.rhs}, {"detail", v.detail}});
  return j;
}

}  // namespace evolab::models
