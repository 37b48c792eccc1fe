#include <doctest.h>

#include "evolab/error.hpp"
#include "evolab/perturb/perturb.hpp"

#include <cmath>

using namespace evolab;
using namespace evolab::opalg;
using namespace evolab::evofam;
using namespace evolab::perturb;

namespace {

std::shared_ptr<const OperatorFamily> constant(const Matrix& m, double tau) {
  return std::make_shared<const OperatorFamily>(OperatorFamily::constant(make_operator(m), tau));
}

// P shares the norms of A so both live on the same X and D.
std::shared_ptr<const OperatorFamily> constant_like(const OperatorFamily& a, const Matrix& m) {
  DiscreteOperator op{m, a.norms_ptr(), nullptr};
  return std::make_shared<const OperatorFamily>(OperatorFamily::constant(op, a.tau()));
}

Matrix scalar(double a) { return Matrix::Constant(1, 1, a); }

Matrix test_generator() {
  Matrix m(3, 3);
  m << 2.0, -0.5, 0.0, -0.5, 3.0, 0.4, 0.0, 0.4, 5.0;
  return m;
}

}  // namespace

TEST_CASE("perturbed_family: zero and scalar perturbations") {
  auto a = constant(test_generator(), 1.0);
  auto z = perturbed_family(*a, *constant_like(*a, Matrix::Zero(3, 3)));
  CHECK((z.at(0.3) - a->at(0.3)).norm() == 0.0);
  auto s = constant(scalar(1.0), 1.0);
  auto ps = perturbed_family(*s, *constant_like(*s, scalar(0.5)));
  CHECK(ps.at(0.7)(0, 0) == 1.5);
}

TEST_CASE("volterra: zero perturbation reproduces U to rounding") {
  auto a = constant(test_generator(), 1.0);
  auto pair = make_perturbed_pair(a, constant_like(*a, Matrix::Zero(3, 3)), uniform_time_grid(1.0, 1.0 / 64),
                                  Scheme::ImplicitEuler);
  CHECK(pair.discrepancy < 1e-14);
  const auto& t = *pair.v_volterra;
  for (std::size_t j = 0; j < t.report_nodes().size(); ++j)
    for (std::size_t i = 0; i <= j; ++i)
      CHECK((t.at(j, i) - pair.u->propagator(t.report_nodes()[j], t.report_nodes()[i])).norm() < 1e-14);
}

TEST_CASE("volterra: scalar fixture pins the sign convention") {
  auto a = constant(scalar(1.0), 1.0);
  auto pair = make_perturbed_pair(a, constant_like(*a, scalar(0.5)), uniform_time_grid(1.0, 1.0 / 1024),
                                  Scheme::ImplicitEuler);
  std::size_t k = pair.u->steps();
  double u = pair.u->propagator(k, 0)(0, 0);
  double v = pair.v_direct->propagator(k, 0)(0, 0);
  CHECK(std::abs(v - std::exp(-1.5)) < 1e-3);
  CHECK(std::abs((v - u) - (std::exp(-1.5) - std::exp(-1.0))) < 1e-3);
  CHECK(v - u == doctest::Approx(-0.144749).epsilon(5e-3));
  const auto& t = *pair.v_volterra;
  double vv = t.at(t.report_nodes().size() - 1, 0)(0, 0);
  CHECK(std::abs(vv - std::exp(-1.5)) < 1e-3);
  CHECK(pair.discrepancy < 1e-3);
  CHECK(perturbation_consistency(pair) == doctest::Approx(pair.discrepancy));
  CHECK(cocycle_residual(*pair.v_direct, 32, 0) <= 1e-13);
}

TEST_CASE("volterra: discrepancy converges at first order for implicit Euler") {
  auto a = constant(scalar(1.0), 1.0);
  auto ladder = consistency_ladder(a, constant_like(*a, scalar(0.5)), 1.0 / 64, 4, Scheme::ImplicitEuler);
  REQUIRE(ladder.size() == 4);
  for (std::size_t k = 1; k < ladder.size(); ++k) CHECK(ladder[k].order >= 0.9);
  auto zero = consistency_ladder(a, constant_like(*a, scalar(0.0)), 1.0 / 64, 3, Scheme::ImplicitEuler);
  for (const auto& r : zero) CHECK(r.error == 0.0);
}

TEST_CASE("h2: zero perturbation, unit scalar closed form, homogeneity") {
  auto a = constant(scalar(1.0), 2.0);
  auto grid = uniform_time_grid(2.0, 1.0 / 1024);
  auto u = propagate(a, grid);
  ProbeOptions o{.probes = 4};
  auto zero = h2_constant(*constant_like(*a, scalar(0.0)), u, 2.0, 0.0, 1.0, o);
  CHECK(zero.c_hat.front() == 0.0);
  auto unit = h2_constant(*constant_like(*a, scalar(1.0)), u, 2.0, 0.0, 1.0, o);
  double exact = std::sqrt((1 - std::exp(-2.0)) / 2);
  CHECK(exact == doctest::Approx(0.65752).epsilon(1e-5));
  CHECK(std::abs(unit.c_hat.front() - exact) < 1e-3);
  CHECK(unit.method == "svd-exact");
  auto scaled = h2_constant(*constant_like(*a, scalar(3.0)), u, 2.0, 0.0, 1.0, o);
  CHECK(scaled.c_hat.front() == doctest::Approx(3.0 * unit.c_hat.front()).epsilon(1e-12));
  CHECK_THROWS_AS(h2_constant(*constant_like(*a, scalar(1.0)), u, 2.0, 0.0, 2.0, o), PreconditionError);

  auto prof = h2_profile(*constant_like(*a, scalar(1.0)), u, 2.0, 0.0, {0.25, 0.5, 1.0}, o);
  REQUIRE(prof.c_hat.size() == 3);
  CHECK(prof.c_hat[0] <= prof.c_hat[1]);
  CHECK(prof.c_hat[1] <= prof.c_hat[2]);
  CHECK(prof.c_hat[2] == doctest::Approx(unit.c_hat.front()).epsilon(1e-12));
}

TEST_CASE("h2: probe route agrees with the exact route for mu = 2 and is a lower bound otherwise") {
  auto a = constant(test_generator(), 2.0);
  auto u = propagate(a, uniform_time_grid(2.0, 1.0 / 256));
  auto p = constant_like(*a, 0.5 * test_generator());
  ProbeOptions o{.probes = 16, .seed = 3};
  auto exact = h2_constant(*p, u, 2.0, 0.0, 1.0, o);
  auto lp = h2_constant(*p, u, 3.0, 0.0, 1.0, o);
  CHECK(exact.method == "svd-exact");
  CHECK(lp.method == "probe-lower-bound");
  CHECK(std::isfinite(lp.c_hat.front()));
  CHECK(lp.c_hat.front() > 0.0);
}

TEST_CASE("contraction: zero perturbation and scalar bound") {
  auto a = constant(scalar(1.0), 1.0);
  auto u = propagate(a, uniform_time_grid(1.0, 1.0 / 256));
  ProbeOptions o{.probes = 4};
  auto z = neumann_contraction(u, *constant_like(*a, scalar(0.0)), 0.0, 1.0, 2.0, o);
  CHECK(z.norm == 0.0);
  CHECK(z.all_below_one);
  CHECK(z.critical_length == doctest::Approx(1.0));

  auto r = neumann_contraction(u, *constant_like(*a, scalar(0.5)), 0.0, 1.0, 2.0, o);
  REQUIRE(r.norms.size() == r.bounds.size());
  for (std::size_t k = 0; k < r.norms.size(); ++k) CHECK(r.norms[k] <= 1.1 * r.bounds[k]);
  CHECK(r.critical_length > 0.0);
  CHECK(r.norms.front() < 1.0);
}

TEST_CASE("gap: zero perturbation and the MR gap bound") {
  auto a = constant(scalar(1.0), 1.0);
  auto grid = uniform_time_grid(1.0, 1.0 / 256);
  ProbeOptions o{.probes = 4};
  auto zero = make_perturbed_pair(a, constant_like(*a, scalar(0.0)), grid, Scheme::ImplicitEuler, false);
  CHECK(mr_gap_bound(zero, 2.0, 0.0, o).gap == 0.0);

  auto a3 = constant(test_generator(), 1.0);
  auto pair = make_perturbed_pair(a3, constant_like(*a3, 0.3 * test_generator()), grid, Scheme::ImplicitEuler, false);
  auto g = mr_gap_bound(pair, 2.0, 0.0, o);
  CHECK(g.gap > 0.0);
  CHECK(g.holds);
  CHECK(g.gap <= g.kappa * g.c_hat * (1 + 1e-12));
}
