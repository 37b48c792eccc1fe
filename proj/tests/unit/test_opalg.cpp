#include <doctest.h>

#include "evolab/error.hpp"
#include "evolab/opalg/assembly.hpp"
#include "evolab/opalg/dini.hpp"
#include "evolab/opalg/estimate.hpp"
#include "evolab/opalg/fractional.hpp"
#include "evolab/opalg/norms.hpp"
#include "evolab/opalg/serialize.hpp"
#include "evolab/opalg/trace_norm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace evolab;
using namespace evolab::opalg;

namespace {

std::shared_ptr<const Grid> grid1d(int n, BoundarySpec b = BoundarySpec::all_dirichlet()) {
  return std::make_shared<const Grid>(make_grid(1, {}, n, b));
}

DiscreteOperator laplacian(int n) {
  auto g = grid1d(n);
  TensorField id = [](double, Point) { return Eigen::Matrix2d(Eigen::Matrix2d::Identity()); };
  ScalarField zero = [](double, Point) { return 0.0; };
  return assemble_variable_heat(g, id, zero, {0.0, 1.0}).sample(0);
}

Vector sorted_real_eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m);
  Vector ev = es.eigenvalues().real();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

}  // namespace

TEST_CASE("grid: five nodes on the unit interval") {
  auto g = make_grid(1, {}, 5, BoundarySpec::all_dirichlet());
  REQUIRE(g.dof_count() == 3);
  auto w = g.dof_weights();
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(g.nodes()[g.dofs()[k]].x == doctest::Approx(0.25 * (k + 1)));
    CHECK(w[k] == doctest::Approx(0.25));
  }
}

TEST_CASE("grid: three nodes leave a single interior node") {
  auto g = make_grid(1, {}, 3, BoundarySpec::all_dirichlet());
  REQUIRE(g.dof_count() == 1);
  CHECK(g.nodes()[g.dofs()[0]].x == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_grid(1, {}, 2, BoundarySpec::all_dirichlet()), PreconditionError);
  CHECK_THROWS_AS(make_grid(3, {}, 5, BoundarySpec::all_dirichlet()), PreconditionError);
}

TEST_CASE("grid: 2D with Dirichlet on the left edge only") {
  auto g = make_grid(2, {}, 5, BoundarySpec::dirichlet_on({Side::Left}));
  CHECK(g.node_count() == 25);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    bool on_left = g.nodes()[k].x == 0.0;
    CHECK((g.tags()[k] == BoundaryTag::Dirichlet0) == on_left);
  }
  CHECK(g.dof_count() == 20);
  CHECK(g.has_gamma1());
  CHECK_THROWS_AS(make_grid(1, {}, 5, BoundarySpec::dirichlet_on({}), true), PreconditionError);
}

TEST_CASE("assembly: identity coefficient gives the textbook stencil") {
  auto l = laplacian(5);
  Matrix expected = Matrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    expected(i, i) = 2.0;
    if (i > 0) expected(i, i - 1) = -1.0;
    if (i < 2) expected(i, i + 1) = -1.0;
  }
  expected /= 0.0625;
  CHECK((l.matrix - expected).norm() < 1e-12);
  CHECK(l.self_adjoint());
  // smallest eigenvalue (2/h²)(1 − cos πh), h = 1/4
  double h = 0.25;
  double lam = 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h));
  CHECK(lam == doctest::Approx(9.3726).epsilon(1e-4));
  CHECK(sorted_real_eigenvalues(l.matrix)(0) == doctest::Approx(lam).epsilon(1e-12));
}

TEST_CASE("assembly: time-scaled coefficient scales the samples") {
  auto g = grid1d(9);
  TensorField a = [](double t, Point) { return Eigen::Matrix2d((1.0 + t / 2) * Eigen::Matrix2d::Identity()); };
  ScalarField zero = [](double, Point) { return 0.0; };
  auto fam = assemble_variable_heat(g, a, zero, {0.0, 0.5, 1.0});
  for (std::size_t k = 0; k < 3; ++k) {
    double t = fam.time_grid()[k];
    CHECK((fam.sample(k).matrix - (1.0 + t / 2) * fam.sample(0).matrix).norm() < 1e-9);
  }
  CHECK((fam.at(0.25) - 1.125 * fam.sample(0).matrix).norm() < 1e-9);
}

TEST_CASE("assembly: ellipticity violation names the location") {
  auto g = grid1d(5);
  TensorField a = [](double t, Point) { return Eigen::Matrix2d((0.5 - t) * Eigen::Matrix2d::Identity()); };
  try {
    check_ellipticity(*g, a, {0.0, 0.25, 0.5, 0.75});
    FAIL("expected an ellipticity error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("t = 0.5") != std::string::npos);
  }
}

TEST_CASE("assembly: mixed Laplacian eigenvalues follow the Dirichlet-Neumann closed form") {
  auto g = grid1d(5, BoundarySpec::dirichlet_on({Side::Left}));
  auto l = assemble_mixed_laplacian(g);
  REQUIRE(l.size() == 4);
  // (4/h²) sin²((2k−1)πh/4), k = 1..N
  const double h = 0.25;
  Vector ev = sorted_real_eigenvalues(l.matrix);
  for (int k = 1; k <= 4; ++k) {
    double s = std::sin((2 * k - 1) * std::numbers::pi * h / 4);
    CHECK(ev(k - 1) == doctest::Approx(4.0 / (h * h) * s * s).epsilon(1e-10));
  }
  CHECK(ev(0) == doctest::Approx(2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h / 2))).epsilon(1e-10));
  // reflected row annihilates constants
  CHECK(std::abs(l.matrix.row(3).sum()) < 1e-12);
  CHECK(l.self_adjoint());
  CHECK_THROWS_AS(assemble_mixed_laplacian(grid1d(5)), PreconditionError);
}

TEST_CASE("fractional power: diagonal case and semigroup law") {
  Matrix d = Vector(Eigen::Vector2d(1.0, 4.0)).asDiagonal();
  auto half = fractional_power(make_operator(d), 0.5);
  CHECK((half.matrix - Matrix(Vector(Eigen::Vector2d(1.0, 2.0)).asDiagonal())).norm() < 1e-14);

  auto l = laplacian(9);
  for (double alpha : {0.25, 0.5, 0.7}) {
    Matrix prod = fractional_power(l, alpha).matrix * fractional_power(l, 1 - alpha).matrix;
    CHECK((prod - l.matrix).norm() / l.matrix.norm() < 1e-10);
  }
  CHECK((fractional_power(l, 1.0).matrix - l.matrix).norm() == 0.0);
}

TEST_CASE("fractional power: square-root spectrum of the Dirichlet Laplacian") {
  auto l = laplacian(5);
  Vector ev = sorted_real_eigenvalues(fractional_power(l, 0.5).matrix);
  const double h = 0.25;
  for (int k = 1; k <= 3; ++k) {
    double lam = 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / 2), 2);
    CHECK(ev(k - 1) == doctest::Approx(std::sqrt(lam)).epsilon(1e-12));
  }
}

TEST_CASE("fractional power: defective input is refused, Schur route handles it") {
  Matrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(fractional_power(make_operator(j), 0.5), DefectiveMatrixError);
  auto r = fractional_power_schur(make_operator(j), 0.5);
  CHECK((r.matrix * r.matrix - j).norm() < 1e-10);
  CHECK_THROWS_AS(fractional_power(make_operator(-Matrix::Identity(2, 2)), 0.5), PreconditionError);
}

TEST_CASE("nonlocal: zero kernel, distance of an affine kernel, non-finite kernel") {
  auto g = grid1d(65, BoundarySpec::dirichlet_on({Side::Left}));
  auto lap = assemble_mixed_laplacian(g);
  std::vector<double> times{0.0, 0.5, 1.0};
  KernelField zero = [](double, Point, Point) { return 0.0; };
  auto z = assemble_nonlocal_perturbation(g, zero, nullptr, times, lap.norms);
  for (const auto& s : z.samples()) CHECK(s.matrix.norm() == 0.0);

  KernelField psi = [](double t, Point x, Point) { return (1.0 + t) * x.x; };
  // ‖x‖_{L²(0,1)} = 1/√3; Γ1 is a single point with unit measure
  for (auto [t, s] : {std::pair{0.0, 1.0}, std::pair{0.2, 0.7}})
    CHECK(kernel_distance(*g, psi, t, s) == doctest::Approx(std::abs(t - s) / std::sqrt(3.0)).epsilon(1e-3));

  KernelField bad = [](double t, Point x, Point) { return x.x > 0.5 && t > 0.4 ? std::nan("") : 1.0; };
  CHECK_THROWS_AS(assemble_nonlocal_perturbation(g, bad, nullptr, times, lap.norms), NumericalError);
}

TEST_CASE("dini: constant family") {
  auto l = laplacian(9);
  auto d = dini_modulus(OperatorFamily(uniform_time_grid(1.0, 1.0 / 16), std::vector<DiscreteOperator>(17, l)), 2.0,
                        {1.0 / 16, 1.0 / 8, 1.0 / 4});
  for (double w : d.omega_hat) CHECK(w == 0.0);
  CHECK(d.dini_integral == 0.0);
  CHECK_THROWS_AS(dini_modulus(OperatorFamily({0.0}, {l}), 2.0, {0.5}), PreconditionError);
}

TEST_CASE("dini: Lipschitz family (1+t)L") {
  auto l = laplacian(9);
  auto times = uniform_time_grid(1.0, 1.0 / 32);
  std::vector<DiscreteOperator> s;
  for (double t : times) {
    auto op = l;
    op.matrix *= 1.0 + t;
    s.push_back(op);
  }
  OperatorFamily fam(times, s);
  auto d = dini_modulus(fam, 2.0, default_lags(fam));
  // ‖L‖_{D→X} = λmax/(1+λmax) for self-adjoint L with D-reference L
  double lmax = sorted_real_eigenvalues(l.matrix).maxCoeff();
  double slope = lmax / (1.0 + lmax);
  for (std::size_t i = 0; i < d.deltas.size(); ++i)
    CHECK(d.omega_hat[i] == doctest::Approx(d.deltas[i] * slope).epsilon(1e-8));
  CHECK(std::isfinite(d.dini_integral));
  CHECK_FALSE(d.divergent);
  CHECK(std::is_sorted(d.omega_hat.begin(), d.omega_hat.end()));
}

TEST_CASE("dini: square-root family with nu = 3 reports divergence") {
  auto l = laplacian(9);
  std::vector<double> times;
  for (int k = 0; k <= 40; ++k) times.push_back(k == 0 ? 0.0 : std::pow(2.0, -40.0 + k));
  std::vector<DiscreteOperator> s;
  for (double t : times) {
    auto op = l;
    op.matrix *= 1.0 + std::sqrt(t);
    s.push_back(op);
  }
  OperatorFamily fam(times, s);
  std::vector<double> lags;
  for (int k = 30; k >= 1; --k) lags.push_back(std::pow(2.0, -k));
  auto d = dini_modulus(fam, 3.0, lags);
  CHECK(d.divergent);
  CHECK(d.tail_exponent == doctest::Approx(1.5).epsilon(0.05));
  // midpoint values grow as the smallest lag shrinks
  auto coarse = dini_modulus(fam, 3.0, std::vector<double>(lags.begin() + 10, lags.end()));
  CHECK(d.dini_integral > 10 * coarse.dini_integral);
}

TEST_CASE("trace norm: scalar, zero, diagonal closed form") {
  auto a = make_operator(Matrix::Constant(1, 1, 2.0));
  CHECK(trace_norm(a, Vector::Ones(1), 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(trace_norm_quadrature(a, Vector::Ones(1), 2.0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(trace_norm(a, Vector::Zero(1), 2.0) == 0.0);

  Matrix d = Vector(Eigen::Vector2d(1.5, 7.0)).asDiagonal();
  auto op = make_operator(d);
  Vector x(2);
  x << 0.3, -1.2;
  double closed = x.norm() + std::sqrt(1.5 / 2 * x(0) * x(0) + 7.0 / 2 * x(1) * x(1));
  CHECK(trace_norm(op, x, 2.0) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(std::abs(trace_norm_quadrature(op, x, 2.0) - closed) < 1e-8);
  CHECK_THROWS_AS(trace_norm(make_operator(Matrix::Zero(1, 1)), Vector::Ones(1), 2.0), NumericalError);
}

TEST_CASE("trace norm: norm axioms") {
  auto l = laplacian(9);
  Vector x = gaussian_vector(l.size(), 3, 0), y = gaussian_vector(l.size(), 3, 1);
  for (double p : {2.0, 1.5, 3.0}) {
    double nx = trace_norm(l, x, p), ny = trace_norm(l, y, p);
    CHECK(std::abs(trace_norm(l, -2.5 * x, p) - 2.5 * nx) <= 1e-12 * nx);
    CHECK(trace_norm(l, x + y, p) <= (nx + ny) * (1 + 1e-12));
    CHECK(nx > 0);
    // ‖x‖ ≤ ‖x‖_Tr ≤ c(A)(‖x‖ + ‖Ax‖)
    CHECK(nx >= l.x_norm(x));
    CHECK(nx <= trace_norm_upper_constant(l, p) * (l.x_norm(x) + l.x_norm(l.matrix * x)) * (1 + 1e-12));
  }
}

TEST_CASE("norms: D to X operator norm against the eigenvalue oracle") {
  auto l = laplacian(9);
  double lmax = sorted_real_eigenvalues(l.matrix).maxCoeff();
  CHECK(dx_operator_norm(l.matrix, *l.norms) == doctest::Approx(lmax / (1 + lmax)).epsilon(1e-8));
  CHECK(dx_operator_norm(Matrix::Identity(7, 7), *l.norms) ==
        doctest::Approx(1.0 / (1.0 + sorted_real_eigenvalues(l.matrix)(0))).epsilon(1e-8));
}

TEST_CASE("serialize: operator and observation round trip") {
  auto g = grid1d(9);
  auto l = laplacian(9);
  auto back = operator_from_json(to_json(l));
  CHECK((back.matrix - l.matrix).norm() == 0.0);
  CHECK((back.norms->weights - l.norms->weights).norm() == 0.0);
  auto c = point_observation(*g, {0.3, 0.0});
  auto cb = observation_from_json(to_json(c));
  CHECK((cb.matrix - c.matrix).norm() == 0.0);
  CHECK(cb.kind == ObservationKind::PointEvaluation);
  auto gb = grid_from_json(to_json(*g));
  CHECK(gb.dof_count() == g->dof_count());
}

TEST_CASE("observation: point evaluation interpolates linear data") {
  auto g = grid1d(9);
  auto c = point_observation(*g, {0.3, 0.0});
  Vector u(g->dof_count());
  for (std::size_t k = 0; k < g->dof_count(); ++k) u(k) = g->nodes()[g->dofs()[k]].x;
  CHECK((c.matrix * u)(0) == doctest::Approx(0.3));
}
