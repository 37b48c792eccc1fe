#include <doctest.h>

#include "evolab/error.hpp"
#include "evolab/evofam/evolution.hpp"
#include "evolab/evofam/expm.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/assembly.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

using namespace evolab;
using namespace evolab::opalg;
using namespace evolab::evofam;

namespace {

std::shared_ptr<const OperatorFamily> constant(const Matrix& m, double tau = 1.0) {
  return std::make_shared<const OperatorFamily>(OperatorFamily::constant(make_operator(m), tau));
}

Matrix scalar(double a) { return Matrix::Constant(1, 1, a); }

std::shared_ptr<const OperatorFamily> heat_family(int n, double tau = 1.0) {
  auto g = std::make_shared<const Grid>(make_grid(1, {}, n, BoundarySpec::all_dirichlet()));
  TensorField a = [](double t, Point) { return Eigen::Matrix2d((1.0 + t / 2) * Eigen::Matrix2d::Identity()); };
  ScalarField zero = [](double, Point) { return 0.0; };
  return std::make_shared<const OperatorFamily>(assemble_variable_heat(g, a, zero, uniform_time_grid(tau, tau / 16)));
}

Matrix random_stable(int n, std::uint64_t seed) {
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) m.col(j) = gaussian_vector(n, seed, j);
  // shift the spectrum into the right half-plane
  return m + (m.cwiseAbs().rowwise().sum().maxCoeff() + 1.0) * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("expm: identity, diagonal, nilpotent") {
  auto d = make_operator(Vector(Eigen::Vector2d(1.0, 2.0)).asDiagonal().toDenseMatrix());
  CHECK((expm_oracle(d, 0.0) - Matrix::Identity(2, 2)).norm() == 0.0);
  Matrix e = expm_oracle(d, 1.0);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(std::abs(e(0, 1)) + std::abs(e(1, 0)) == 0.0);
  Matrix n(2, 2);
  n << 0.0, 1.0, 0.0, 0.0;
  Matrix expected = Matrix::Identity(2, 2) - n;
  CHECK((expm_oracle(make_operator(n), 1.0) - expected).norm() < 1e-15);
  CHECK_THROWS_AS(expm_oracle(d, -1.0), PreconditionError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(expm(bad), NumericalError);
}

TEST_CASE("expm: agrees with Eigen's MatrixExponential across every Pade degree") {
  // 1-norms from 1e-3 to 50 cover degrees 3, 5, 7, 9 and 13 with scaling
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Matrix m(6, 6);
    for (int j = 0; j < 6; ++j) m.col(j) = gaussian_vector(6, seed, j);
    m /= m.cwiseAbs().colwise().sum().maxCoeff();
    for (double scale : {1e-3, 0.1, 0.5, 1.5, 4.0, 50.0}) {
      Matrix a = scale * m;
      Matrix ref = a.exp();
      CHECK((expm(a) - ref).norm() / ref.norm() < 1e-13 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("propagate: zero generator gives the identity") {
  auto u = propagate(constant(Matrix::Zero(3, 3)), uniform_time_grid(1.0, 0.125));
  for (std::size_t i = 0; i <= u.steps(); i += 3)
    for (std::size_t j = i; j <= u.steps(); j += 2) CHECK((u.propagator(j, i) - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("propagate: scalar implicit Euler against exp(-1)") {
  auto u = propagate(constant(scalar(1.0)), uniform_time_grid(1.0, 1.0 / 1024));
  double v = u.propagator(u.steps(), 0)(0, 0);
  CHECK(v == doctest::Approx(std::pow(1.0 + 1.0 / 1024, -1024.0)).epsilon(1e-12));
  CHECK(std::abs(v - std::exp(-1.0)) < 5e-4);
}

TEST_CASE("propagate: rejects bad grids and singular steps") {
  CHECK_THROWS_AS(propagate(constant(scalar(1.0)), {0.0, 0.5, 0.5, 1.0}), PreconditionError);
  CHECK_THROWS_AS(propagate(constant(scalar(1.0)), {0.0, 0.5, 1.0}, Scheme::ImplicitEuler, 0.25), PreconditionError);
  // I + h A singular for A = −1/h
  CHECK_THROWS_AS(propagate(constant(scalar(-2.0)), {0.0, 0.5, 1.0}), NumericalError);
  CHECK(scheme_from_string("crank-nicolson") == Scheme::CrankNicolson);
  CHECK_THROWS_AS(scheme_from_string("rk4"), PreconditionError);
}

TEST_CASE("propagate: measured orders on constant matrices") {
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    auto op = make_operator(random_stable(5, seed));
    auto ie = propagator_ladder(op, 1.0, 1.0 / 32, 5, Scheme::ImplicitEuler);
    auto cn = propagator_ladder(op, 1.0, 1.0 / 32, 5, Scheme::CrankNicolson);
    CHECK(ie.back().order == doctest::Approx(1.0).epsilon(0.2));
    CHECK(cn.back().order == doctest::Approx(2.0).epsilon(0.1));
    CHECK(ie.front().order == 0.0);
  }
}

TEST_CASE("mr: zero source and scalar closed forms") {
  auto fam = constant(scalar(1.0));
  auto grid = uniform_time_grid(1.0, 1.0 / 1024);
  auto u = propagate(fam, grid);
  Trajectory zero(grid.size(), Vector::Zero(1));
  auto z = solve_nonhomogeneous(u, zero, 0, u.steps(), 2.0);
  CHECK(z.mr_norm == 0.0);

  Trajectory one(grid.size(), Vector::Ones(1));
  auto s = solve_nonhomogeneous(u, one, 0, u.steps(), 2.0);
  // u = 1 − e^{−t}
  double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  double deriv = std::sqrt((1 - e2) / 2);
  double ul2 = std::sqrt(1 - 2 * (1 - e1) + (1 - e2) / 2);
  CHECK(s.deriv_lp == doctest::Approx(deriv).epsilon(1e-3));
  CHECK(s.alu_lp == doctest::Approx(ul2).epsilon(1e-3));
  CHECK(s.u_lp == doctest::Approx(ul2).epsilon(1e-3));
  CHECK(s.trajectory.back()(0) == doctest::Approx(1 - e1).epsilon(1e-3));

  auto conv = solve_nonhomogeneous(fam, grid, one, 0.0, 1.0, 2.0, Scheme::ImplicitEuler);
  CHECK(conv.mr_norm == doctest::Approx(s.mr_norm).epsilon(1e-14));
  CHECK_THROWS_AS(solve_nonhomogeneous(u, one, 0, 10, 2.0), PreconditionError);
}

TEST_CASE("mr: zero generator, unit source") {
  auto u = propagate(constant(scalar(0.0)), uniform_time_grid(1.0, 1.0 / 1024));
  Trajectory one(u.steps() + 1, Vector::Ones(1));
  auto s = solve_nonhomogeneous(u, one, 0, u.steps(), 2.0);
  CHECK(s.alu_lp == 0.0);
  CHECK(s.deriv_lp == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.u_lp == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-3));
  CHECK(s.mr_norm == doctest::Approx(1.0 + 1.0 / std::sqrt(3.0)).epsilon(1e-3));
}

TEST_CASE("mr_constant: monotone in the probe count, refinement-stable") {
  auto u = propagate(constant(scalar(1.0)), uniform_time_grid(1.0, 1.0 / 512));
  ProbeOptions few{.probes = 2, .seed = 5};
  ProbeOptions many{.probes = 6, .seed = 5};
  auto a = mr_constant(u, 2.0, 0, u.steps(), few);
  auto b = mr_constant(u, 2.0, 0, u.steps(), many);
  CHECK(b.value >= a.value);
  CHECK(std::is_sorted(b.running_max.begin(), b.running_max.end()));
  CHECK(a.running_max == std::vector<double>(b.running_max.begin(), b.running_max.begin() + 2));

  auto fine = propagate(constant(scalar(1.0)), uniform_time_grid(1.0, 1.0 / 1024));
  auto c = mr_constant(fine, 2.0, 0, fine.steps(), many);
  CHECK(std::abs(c.value - b.value) <= 0.05 * c.value);
}

TEST_CASE("smoothing_constant: zero generator closed form, refinement") {
  auto u = propagate(constant(Matrix::Zero(2, 2)), uniform_time_grid(1.0, 1.0 / 1024));
  ProbeOptions o{.probes = 4};
  auto m = smoothing_constant(u, 2.0, o);
  // v = t x: ‖v‖ = 1/√3, ‖v̇‖ = 1, A-part 0
  CHECK(m.value == doctest::Approx(1.0 + 1.0 / std::sqrt(3.0)).epsilon(1e-3));

  // 1D Laplacian: stable across a Δt halving
  auto lap = heat_family(17);
  auto uh = propagate(lap, uniform_time_grid(1.0, 1.0 / 256));
  auto m1 = smoothing_constant(uh, 2.0, o);
  auto uh2 = propagate(lap, uniform_time_grid(1.0, 1.0 / 512));
  auto m2 = smoothing_constant(uh2, 2.0, o);
  CHECK(std::abs(m1.value - m2.value) <= 0.1 * m2.value);
}

TEST_CASE("cocycle: composition of one-step maps is exact") {
  auto u = propagate(constant(random_stable(4, 9)), uniform_time_grid(1.0, 1.0 / 64));
  CHECK(cocycle_residual(u, 64, 1) <= 1e-13);
  auto h = propagate(heat_family(33), uniform_time_grid(1.0, 1.0 / 256));
  CHECK(cocycle_residual(h, 64, 2) <= 1e-12);
  CHECK(propagator_bound(h) <= 1.0 + 1e-12);
}

TEST_CASE("gram sweep matches direct sums") {
  auto u = propagate(heat_family(9), uniform_time_grid(1.0, 1.0 / 32));
  Matrix q = Matrix::Identity(u.size(), u.size());
  auto h = gram_sweep(u, [&](std::size_t) { return q; }, u.steps());
  Matrix direct = Matrix::Zero(u.size(), u.size());
  for (std::size_t k = 1; k <= u.steps(); ++k) {
    Matrix p = u.propagator(k, 0);
    direct += u.dt(k - 1) * p.transpose() * q * p;
  }
  CHECK((h[0] - direct).norm() < 1e-12 * direct.norm());
  CHECK(h[u.steps()].norm() == 0.0);
}
