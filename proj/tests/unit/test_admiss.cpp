#include <doctest.h>

#include "evolab/admiss/gamma.hpp"
#include "evolab/admiss/invariance.hpp"
#include "evolab/admiss/transfer.hpp"
#include "evolab/error.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/assembly.hpp"
#include "evolab/opalg/fractional.hpp"

#include <cmath>

using namespace evolab;
using namespace evolab::opalg;
using namespace evolab::evofam;
using namespace evolab::admiss;

namespace {

std::shared_ptr<const OperatorFamily> constant(const Matrix& m, double tau) {
  return std::make_shared<const OperatorFamily>(OperatorFamily::constant(make_operator(m), tau));
}

std::shared_ptr<const OperatorFamily> constant_like(const OperatorFamily& a, const Matrix& m) {
  DiscreteOperator op{m, a.norms_ptr(), nullptr};
  return std::make_shared<const OperatorFamily>(OperatorFamily::constant(op, a.tau()));
}

Matrix scalar(double a) { return Matrix::Constant(1, 1, a); }

ObservationMap unit_c(Index n) { return custom_observation(Matrix::Identity(n, n), Vector::Ones(n)); }

ObservationMap zero_c(Index n) { return custom_observation(Matrix::Zero(1, n), Vector::Ones(1)); }

Matrix test_generator() {
  Matrix m(3, 3);
  m << 2.0, -0.5, 0.0, -0.5, 3.0, 0.4, 0.0, 0.4, 5.0;
  return m;
}

DiscreteOperator laplacian(int n) {
  auto g = std::make_shared<const Grid>(make_grid(1, {}, n, BoundarySpec::all_dirichlet()));
  TensorField id = [](double, Point) { return Eigen::Matrix2d(Eigen::Matrix2d::Identity()); };
  ScalarField zero = [](double, Point) { return 0.0; };
  return assemble_variable_heat(g, id, zero, {0.0, 1.0}).sample(0);
}

const double kGammaUnit = std::sqrt((1 - std::exp(-2.0)) / 2);

}  // namespace

TEST_CASE("gamma_semigroup: scalar, zero observation, zero generator") {
  auto a = make_operator(scalar(1.0));
  auto r = gamma_semigroup(a, unit_c(1), 2.0, 1.0);
  CHECK(r.gamma_hat == doctest::Approx(kGammaUnit).epsilon(1e-10));
  CHECK(r.method == "svd-exact");
  CHECK(gamma_semigroup(a, zero_c(1), 2.0, 1.0).gamma_hat == 0.0);
  auto z = make_operator(Matrix::Zero(2, 2));
  CHECK(gamma_semigroup(z, unit_c(2), 2.0, 1.0).gamma_hat == doctest::Approx(1.0).epsilon(1e-12));
  // θ ≠ 2: scalar closed form ((1 − e^{−θ})/θ)^{1/θ}
  auto r3 = gamma_semigroup(a, unit_c(1), 3.0, 1.0);
  CHECK(r3.gamma_hat == doctest::Approx(std::cbrt((1 - std::exp(-3.0)) / 3)).epsilon(1e-8));
  CHECK_THROWS_AS(gamma_semigroup(a, unit_c(1), 1.0, 1.0), PreconditionError);
}

TEST_CASE("gamma_evolution: zero observation, zero generator, scalar") {
  auto grid = uniform_time_grid(1.0, 1.0 / 1024);
  auto z = propagate(constant(Matrix::Zero(2, 2), 1.0), grid);
  CHECK(gamma_evolution(z, zero_c(2), 2.0, 0.0, 1.0).gamma_hat == 0.0);
  CHECK(gamma_evolution(z, unit_c(2), 2.0, 0.0, 1.0).gamma_hat == doctest::Approx(1.0).epsilon(1e-12));
  auto u = propagate(constant(scalar(1.0), 1.0), grid);
  auto r = gamma_evolution(u, unit_c(1), 2.0, 0.0, 1.0);
  CHECK(std::abs(r.gamma_hat - kGammaUnit) < 1e-3);
  CHECK_THROWS_AS(gamma_evolution(u, unit_c(1), 2.0, 0.5, 0.5), PreconditionError);
}

TEST_CASE("gamma_evolution: exact route equals the probe supremum for theta = 2") {
  auto u = propagate(constant(test_generator(), 1.0), uniform_time_grid(1.0, 1.0 / 128));
  Matrix cm(2, 3);
  cm << 1.0, 0.5, -0.2, 0.0, 1.0, 2.0;
  auto c = custom_observation(cm, Vector::Ones(2));
  double exact = gamma_evolution(u, c, 2.0, 0.0, 1.0).gamma_hat;
  auto map = observed_map(u, 0, u.steps(), [&](std::size_t) { return cm; }, c.y_weights, 2.0);
  auto est = maximize_ratio(map, {.probes = 3, .seed = 1, .ascent_iterations = 400, .tolerance = 1e-15});
  CHECK(est.value <= exact * (1 + 1e-12));
  CHECK(std::abs(est.value - exact) < 1e-6);
}

TEST_CASE("gamma: exact homogeneity under scaling of C") {
  auto u = propagate(constant(test_generator(), 1.0), uniform_time_grid(1.0, 1.0 / 128));
  Matrix cm(1, 3);
  cm << 1.0, -2.0, 0.5;
  auto c = custom_observation(cm, Vector::Ones(1));
  for (double theta : {2.0, 1.5}) {
    auto opts = default_gamma_probes(4);
    double g = gamma_evolution(u, c, theta, 0.0, 1.0, opts).gamma_hat;
    double g3 = gamma_evolution(u, c.scaled(-3.0), theta, 0.0, 1.0, opts).gamma_hat;
    CHECK(std::abs(g3 - 3.0 * g) <= 1e-12 * g3);
  }
}

TEST_CASE("timevarying_gamma: constant C and a time-scaled C") {
  auto u = propagate(constant(test_generator(), 1.0), uniform_time_grid(1.0, 1.0 / 128));
  Matrix cm(1, 3);
  cm << 1.0, 0.3, 0.0;
  auto c = custom_observation(cm, Vector::Ones(1));
  std::vector<ObservationMap> same(u.time_grid().size(), c), grown;
  for (double t : u.time_grid()) grown.push_back(c.scaled(1.0 + t));
  double g = gamma_evolution(u, c, 2.0, 0.0, 1.0).gamma_hat;
  CHECK(std::abs(timevarying_gamma(u, same, 2.0, 0.0, 1.0).gamma_hat - g) <= 1e-12);
  double gt = timevarying_gamma(u, grown, 2.0, 0.0, 1.0).gamma_hat;
  CHECK(gt >= g);
  CHECK(gt <= 2.0 * g);
  same.pop_back();
  CHECK_THROWS_AS(timevarying_gamma(u, same, 2.0, 0.0, 1.0), PreconditionError);
}

TEST_CASE("gamma_global: zero observation and the zero generator") {
  auto z = propagate(constant(Matrix::Zero(2, 2), 1.0), uniform_time_grid(1.0, 1.0 / 64));
  CHECK(gamma_global(z, zero_c(2), 2.0, 0.25, 1.0).report.gamma_hat == 0.0);
  auto g = gamma_global(z, unit_c(2), 2.0, 0.25, 1.0);
  // sup_s (τ − s)^{1/2}
  CHECK(g.report.gamma_hat == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 0; k < g.anchors.size(); ++k)
    CHECK(g.gamma_to_end[k] == doctest::Approx(std::sqrt(1.0 - g.anchors[k])).epsilon(1e-12));
}

TEST_CASE("frozen_vs_evolution: constant family and zero observation") {
  auto l = laplacian(17);
  auto u = propagate(std::make_shared<const OperatorFamily>(OperatorFamily::constant(l, 1.0)),
                     uniform_time_grid(1.0, 1.0 / 1024));
  auto c = custom_observation(Matrix::Ones(1, l.size()) / l.size(), Vector::Ones(1));
  auto f = frozen_vs_evolution(u, c, 2.0, 0.5);
  CHECK(f.ratio == doctest::Approx(1.0).epsilon(0.02));
  auto z = frozen_vs_evolution(u, zero_c(l.size()), 2.0, 0.5);
  CHECK(z.evolution.gamma_hat == 0.0);
  CHECK(z.frozen_max == 0.0);
  CHECK(z.ratio == 1.0);
}

TEST_CASE("duhamel: identical generators and the commuting diagonal case") {
  auto a0 = make_operator(Vector(Eigen::Vector2d(1.0, 2.0)).asDiagonal().toDenseMatrix());
  auto a1 = make_operator(Vector(Eigen::Vector2d(2.0, 3.0)).asDiagonal().toDenseMatrix());
  Vector x(2);
  x << 0.6, -0.8;
  std::vector<double> ts{0.25, 0.5, 1.0};
  CHECK(duhamel_frozen_residual(a0, a0, x, ts) <= 1e-13);
  double r1024 = duhamel_frozen_residual(a0, a1, x, ts, 1024);
  CHECK(r1024 <= 1e-6);
  double r256 = duhamel_frozen_residual(a0, a1, x, ts, 256);
  double r512 = duhamel_frozen_residual(a0, a1, x, ts, 512);
  CHECK(std::log2(r256 / r512) >= 1.8);
  CHECK(std::log2(r512 / r1024) >= 1.8);
}

TEST_CASE("semigroup_lp_bound: scalar closed form") {
  auto a = make_operator(scalar(2.0));
  // (∫_0^1 e^{−2θr} dr)^{1/θ}
  CHECK(semigroup_lp_bound(a, 2.0, 1.0) == doctest::Approx(std::sqrt((1 - std::exp(-4.0)) / 4)).epsilon(1e-10));
}

TEST_CASE("tr_beta_transfer: equal generators and a fractional perturbation") {
  auto a0 = laplacian(9);
  auto c = custom_observation(Matrix::Ones(1, a0.size()) / a0.size(), Vector::Ones(1));
  auto opts = default_gamma_probes(0);
  opts.probes = 8;
  auto same = tr_beta_transfer(a0, a0, c, 1.5, 2.0, 1.0, opts);
  CHECK(same.m == doctest::Approx(0.0));
  CHECK(same.eta == doctest::Approx(0.0));
  CHECK(same.gamma_a0 == doctest::Approx(same.gamma_a1));
  CHECK(same.holds);

  auto a1 = a0;
  a1.matrix += fractional_power(a0, 0.25).matrix;
  auto r = tr_beta_transfer(a0, a1, c, 1.5, 2.0, 1.0, opts);
  CHECK(r.finite);
  CHECK(std::isfinite(r.majorant));
  CHECK(r.m > 0.0);
  CHECK(r.holds);
  CHECK(r.gamma_a1 <= 1.1 * r.majorant);
  CHECK_THROWS_AS(tr_beta_transfer(a0, a1, c, 2.0, 2.0, 1.0, opts), PreconditionError);
}

TEST_CASE("b_relative_transfer: constant family and a bounded B") {
  auto l = laplacian(9);
  auto n = l.size();
  auto c = custom_observation(Matrix::Ones(1, n) / n, Vector::Ones(1));
  auto ident = custom_observation(Matrix::Identity(n, n), l.norms->weights);
  auto opts = default_gamma_probes(0);
  opts.probes = 8;
  auto times = uniform_time_grid(1.0, 1.0 / 8);
  OperatorFamily fixed(times, std::vector<DiscreteOperator>(times.size(), l));
  auto r = b_relative_transfer(fixed, ident, c, 2.0, opts);
  CHECK(r.m == 0.0);
  CHECK(r.satisfied);
  CHECK(r.holds);
  CHECK(r.gamma_c0 == doctest::Approx(r.gamma_c1));

  // A(t) = L + t·I with B = identity: bounded increments
  std::vector<DiscreteOperator> s;
  for (double t : times) {
    auto op = l;
    op.matrix += t * Matrix::Identity(n, n);
    s.push_back(op);
  }
  auto shifted = b_relative_transfer(OperatorFamily(times, s), ident, c, 2.0, opts);
  CHECK(shifted.satisfied);
  CHECK(shifted.holds);
  for (std::size_t k = 0; k < shifted.pair_lags.size(); ++k)
    CHECK(shifted.pair_slopes[k] == doctest::Approx(shifted.pair_lags[k]).epsilon(1e-6));
}

TEST_CASE("invariance: zero perturbation, scalar verdict, theta range") {
  auto a = constant(scalar(1.0), 2.0);
  auto grid = uniform_time_grid(2.0, 1.0 / 256);
  auto opts = default_gamma_probes(0);
  opts.probes = 4;
  auto zero = perturb::make_perturbed_pair(a, constant_like(*a, scalar(0.0)), grid, Scheme::ImplicitEuler, false);
  auto z = invariance_report(zero, unit_c(1), 2.0, 2.0, 0.0, 1.0, opts);
  CHECK(z.forward.gamma_from.gamma_hat == z.forward.gamma_to.gamma_hat);
  CHECK(z.forward.delta >= z.forward.gamma_to.gamma_hat);
  CHECK(z.verdict);

  auto pair = perturb::make_perturbed_pair(a, constant_like(*a, scalar(0.5)), grid, Scheme::ImplicitEuler, false);
  auto r = invariance_report(pair, unit_c(1), 2.0, 2.0, 0.0, 1.0, opts);
  CHECK(r.forward.verdict);
  CHECK(r.converse.verdict);
  // δ = ((2κ̂ĉ‖C‖)^θ + (2γ_U)^θ)^{1/θ}
  double d = std::hypot(2 * r.forward.kappa * r.forward.c_hat * r.forward.c_norm, 2 * r.forward.gamma_from.gamma_hat);
  CHECK(r.forward.delta == doctest::Approx(d).epsilon(1e-12));

  try {
    invariance_report(pair, unit_c(1), 3.0, 2.0, 0.0, 1.0, opts);
    FAIL("expected a range error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("(1, mu]") != std::string::npos);
  }
}
