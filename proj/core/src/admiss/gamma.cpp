#include "evolab/admiss/gamma.hpp"

#include "evolab/error.hpp"
#include "evolab/evofam/expm.hpp"
#include "evolab/evofam/mr.hpp"
#include "evolab/opalg/norms.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evolab::admiss {

opalg::ProbeOptions default_gamma_probes(std::uint64_t seed) {
  opalg::ProbeOptions o;
  o.probes = 64;
  o.seed = seed;
  return o;
}

namespace {

void check_theta(double theta) {
  if (!(theta > 1.0) || !std::isfinite(theta)) throw PreconditionError("admissibility exponent theta must lie in (1, inf)");
}

Matrix output_gram(const opalg::ObservationMap& c) {
  return c.matrix.transpose() * c.y_weights.asDiagonal() * c.matrix;
}

// Top eigenpair of the Gram form in X-coordinates: (γ, maximizer x with ‖x‖_W = 1).
std::pair<double, Vector> gram_top(const Matrix& g, const Vector& w) {
  Vector r = w.array().rsqrt();
  Matrix m = r.asDiagonal() * g * r.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  Index top = es.eigenvalues().size() - 1;
  return {std::sqrt(std::max(0.0, es.eigenvalues()(top))), r.asDiagonal() * es.eigenvectors().col(top)};
}

// Power-law fit of the integrand on the first two cells, integrated over the omitted one.
double omitted_sliver(const evofam::EvolutionFamily& u, const std::function<Matrix(std::size_t)>& out_at,
                      const Vector& y_weights, std::size_t is, std::size_t ie, const Vector& x, double theta) {
  if (x.size() == 0 || ie < is + 2) return 0.0;
  double nx = weighted_norm(x, u.norms().weights);
  if (nx == 0) return 0.0;
  Vector u1 = u.step(is) * x, u2 = u.step(is + 1) * u1;
  double i1 = std::pow(weighted_norm(out_at(is + 1) * u1, y_weights) / nx, theta);
  double i2 = std::pow(weighted_norm(out_at(is + 2) * u2, y_weights) / nx, theta);
  if (i1 <= 0) return 0.0;
  const double& t0 = u.time_grid()[is];
  double r1 = u.time_grid()[is + 1] - t0, r2 = u.time_grid()[is + 2] - t0;
  double e = i2 > 0 ? std::log(i2 / i1) / std::log(r2 / r1) : 0.0;
  if (e <= -1.0) return std::numeric_limits<double>::infinity();
  double mass = i1 / std::pow(r1, e) * std::pow(r1, e + 1) / (e + 1);
  return std::pow(mass, 1.0 / theta);
}

AdmissibilityReport evolution_report(const evofam::EvolutionFamily& u, const std::function<Matrix(std::size_t)>& out_at,
                                     const Vector& y_weights, double theta, double s, double tau_prime,
                                     const opalg::ProbeOptions& opts) {
  check_theta(theta);
  if (!(s < tau_prime)) {
    std::ostringstream msg;
    msg << "admissibility interval needs s < tau' (got s = " << s << ", tau' = " << tau_prime << ")";
    throw PreconditionError(msg.str());
  }
  const std::size_t is = u.index_of(s), ie = u.index_of(tau_prime);
  AdmissibilityReport r;
  r.theta = theta, r.s = s, r.tau_prime = tau_prime;
  r.dt = u.dt(is);
  r.n = static_cast<long>(u.size());
  r.seed = opts.seed;
  Vector xstar;
  if (theta == 2.0) {
    auto h = evofam::gram_sweep(
        u,
        [&](std::size_t k) {
          Matrix ck = out_at(k);
          return Matrix(ck.transpose() * y_weights.asDiagonal() * ck);
        },
        ie);
    auto [g, x] = gram_top(h[is], u.norms().weights);
    r.gamma_hat = g;
    xstar = x;
    r.method = "svd-exact";
  } else {
    auto map = evofam::observed_map(u, is, ie, out_at, y_weights, theta);
    auto est = opalg::maximize_ratio(map, opts);
    r.gamma_hat = est.value;
    r.method = est.method;
    r.probes = est.probes;
    if (!est.maximizer.empty()) xstar = est.maximizer[0];
  }
  r.sliver = omitted_sliver(u, out_at, y_weights, is, ie, xstar, theta);
  return r;
}

}  // namespace

AdmissibilityReport gamma_semigroup(const opalg::DiscreteOperator& op, const opalg::ObservationMap& c, double theta,
                                    double alpha_horizon, const opalg::ProbeOptions& opts) {
  check_theta(theta);
  if (!(alpha_horizon > 0)) throw PreconditionError("gamma_semigroup: horizon must be positive");
  if (c.matrix.cols() != op.size()) throw PreconditionError("gamma_semigroup: C and A differ in dimension");

  // Panels [0, α2^{-M}], [α2^{-m-1}, α2^{-m}]: resolves e^{-λ_max t} near 0.
  double nrm = op.matrix.cwiseAbs().colwise().sum().maxCoeff();
  int m_panels = std::clamp(static_cast<int>(std::ceil(std::log2(std::max(1.0, alpha_horizon * nrm * 64.0)))), 4, 48);
  using gl = boost::math::quadrature::gauss<double, 8>;
  std::vector<double> nodes, weights;
  auto add_panel = [&](double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < gl::abscissa().size(); ++i) {
      nodes.push_back(mid - half * gl::abscissa()[i]);
      weights.push_back(half * gl::weights()[i]);
      nodes.push_back(mid + half * gl::abscissa()[i]);
      weights.push_back(half * gl::weights()[i]);
    }
  };
  add_panel(0.0, std::ldexp(alpha_horizon, -m_panels));
  for (int m = m_panels - 1; m >= 0; --m) add_panel(std::ldexp(alpha_horizon, -m - 1), std::ldexp(alpha_horizon, -m));

  std::vector<Matrix> y;
  y.reserve(nodes.size());
  for (double t : nodes) y.push_back(c.matrix * evofam::expm_oracle(op, t));

  AdmissibilityReport r;
  r.theta = theta, r.s = 0.0, r.tau_prime = alpha_horizon;
  r.n = static_cast<long>(op.size());
  r.seed = opts.seed;
  const Vector& w = op.norms->weights;
  if (theta == 2.0) {
    Matrix g = Matrix::Zero(op.size(), op.size());
    for (std::size_t k = 0; k < y.size(); ++k) g += weights[k] * y[k].transpose() * c.y_weights.asDiagonal() * y[k];
    r.gamma_hat = gram_top(g, w).first;
    r.method = "svd-exact";
    return r;
  }
  auto ys = std::make_shared<std::vector<Matrix>>(std::move(y));
  opalg::LinearTrajectoryMap map;
  map.input.time_weights = {1.0};
  map.input.space_weights = w;
  map.input.p = theta;
  opalg::BochnerSpace out;
  out.p = theta;
  out.time_weights = weights;
  out.space_weights = c.y_weights;
  map.outputs = {out};
  map.forward = [ys](const Trajectory& x) {
    Trajectory o;
    for (const auto& m : *ys) o.push_back(m * x[0]);
    return std::vector<Trajectory>{o};
  };
  map.adjoint = [ys, n = op.size()](const std::vector<Trajectory>& g) {
    Vector acc = Vector::Zero(n);
    for (std::size_t k = 0; k < ys->size(); ++k) acc += (*ys)[k].transpose() * g[0][k];
    return Trajectory{acc};
  };
  auto est = opalg::maximize_ratio(map, opts);
  r.gamma_hat = est.value;
  r.method = est.method;
  r.probes = est.probes;
  return r;
}

AdmissibilityReport gamma_evolution(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                                    double s, double tau_prime, const opalg::ProbeOptions& opts) {
  if (c.matrix.cols() != u.size()) throw PreconditionError("gamma_evolution: C and U differ in dimension");
  Matrix cm = c.matrix;
  return evolution_report(u, [&](std::size_t) { return cm; }, c.y_weights, theta, s, tau_prime, opts);
}

AdmissibilityReport timevarying_gamma(const evofam::EvolutionFamily& u, const std::vector<opalg::ObservationMap>& c,
                                      double theta, double s, double tau_prime, const opalg::ProbeOptions& opts) {
  if (c.size() != u.time_grid().size())
    throw PreconditionError("timevarying_gamma: one observation map per stepper node required (grid mismatch)");
  for (const auto& ck : c)
    if (ck.matrix.cols() != u.size() || ck.matrix.rows() != c.front().matrix.rows() ||
        ck.y_weights != c.front().y_weights)
      throw PreconditionError("timevarying_gamma: observation maps differ in shape or Y weights");
  return evolution_report(u, [&](std::size_t k) { return c[k].matrix; }, c.front().y_weights, theta, s, tau_prime,
                          opts);
}

GlobalReport gamma_global(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                          double alpha, double mr_constant, int anchors, const opalg::ProbeOptions& opts) {
  check_theta(theta);
  const std::size_t kk = u.steps();
  const auto& tg = u.time_grid();
  GlobalReport g;
  g.alpha = alpha;
  g.c_constant = mr_constant;
  g.c_norm = opalg::dy_operator_norm(c, u.norms());

  std::vector<std::size_t> idx;
  if (anchors <= 0 && theta == 2.0) {
    for (std::size_t s = 0; s < kk; ++s) idx.push_back(s);
  } else {
    std::size_t m = static_cast<std::size_t>(anchors <= 0 ? 16 : anchors);
    for (std::size_t a = 0; a < m; ++a) idx.push_back(a * kk / m);
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }
  std::vector<double> to_end(kk, -1.0);
  if (theta == 2.0) {
    Matrix q = output_gram(c);
    auto h = evofam::gram_sweep(u, [&](std::size_t) { return q; }, kk);
    for (auto s : idx) to_end[s] = gram_top(h[s], u.norms().weights).first;
  } else {
    for (auto s : idx) to_end[s] = gamma_evolution(u, c, theta, tg[s], tg[kk], opts).gamma_hat;
  }
  g.report.theta = theta;
  g.report.tau_prime = tg[kk];
  g.report.method = theta == 2.0 ? "svd-exact" : "probe-lower-bound";
  g.report.probes = theta == 2.0 ? 0 : opts.probes;
  g.report.dt = u.dt(0);
  g.report.n = static_cast<long>(u.size());
  for (auto s : idx) {
    g.anchors.push_back(tg[s]);
    g.gamma_to_end.push_back(to_end[s]);
    if (to_end[s] > g.report.gamma_hat) g.report.gamma_hat = to_end[s], g.report.s = tg[s];
  }

  // Splitting check on up to 8 anchors with s + α on the grid and ≤ τ.
  if (alpha > 0) {
    const double thp = theta / (theta - 1.0);
    std::size_t m = static_cast<std::size_t>(std::lround(alpha / u.dt(0)));
    if (m >= 1 && m <= kk) {
      for (std::size_t a = 0; a < 8; ++a) {
        std::size_t s = a * (kk - m) / 8;
        if (!g.split_anchors.empty() && tg[s] == g.split_anchors.back()) continue;
        double alpha_s = tg[s + m] - tg[s];
        double glob = to_end[s] >= 0 ? to_end[s] : gamma_evolution(u, c, theta, tg[s], tg[kk], opts).gamma_hat;
        double loc = gamma_evolution(u, c, theta, tg[s], tg[s + m], opts).gamma_hat;
        double lhs = std::pow(glob, theta);
        double rhs = std::pow(loc, theta) + std::pow(mr_constant * g.c_norm, theta) / std::pow(alpha_s, theta / thp);
        g.split_anchors.push_back(tg[s]);
        g.split_lhs.push_back(lhs);
        g.split_rhs.push_back(rhs);
        if (lhs > rhs * (1 + g.split_slack)) g.split_holds = false;
      }
    }
  }
  return g;
}

FrozenComparison frozen_vs_evolution(const evofam::EvolutionFamily& u, const opalg::ObservationMap& c, double theta,
                                     double horizon, int frozen_count, const opalg::ProbeOptions& opts) {
  if (frozen_count < 1) throw PreconditionError("frozen_vs_evolution: need at least one frozen time");
  FrozenComparison f;
  f.evolution = gamma_evolution(u, c, theta, u.time_grid().front(), horizon, opts);
  const auto& fam = u.family();
  for (int m = 0; m < frozen_count; ++m) {
    double t = fam.tau() * m / frozen_count;
    f.frozen_times.push_back(t);
    f.frozen_gamma.push_back(gamma_semigroup(fam.operator_at(t), c, theta, horizon - u.time_grid().front(), opts).gamma_hat);
    f.frozen_max = std::max(f.frozen_max, f.frozen_gamma.back());
  }
  f.ratio = f.frozen_max > 0 ? f.evolution.gamma_hat / f.frozen_max : (f.evolution.gamma_hat == 0 ? 1.0 : 0.0);
  return f;
}

}  // namespace evolab::admiss
