#include "evolab/perturb/perturb.hpp"

#include "evolab/error.hpp"
#include "evolab/opalg/assembly.hpp"
#include "evolab/opalg/norms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evolab::perturb {

opalg::OperatorFamily perturbed_family(const opalg::OperatorFamily& a, const opalg::OperatorFamily& p) {
  if (a.size() != p.size()) throw PreconditionError("perturbed_family: A and P differ in dimension");
  if (a.time_grid() != p.time_grid()) throw PreconditionError("perturbed_family: A and P differ in time grid");
  auto sum = opalg::add_families(a, p);
  if (a.dini() && p.dini() && a.dini()->deltas == p.dini()->deltas) {
    opalg::DiniModulus d = *a.dini();
    for (std::size_t m = 0; m < d.omega_hat.size(); ++m) d.omega_hat[m] += p.dini()->omega_hat[m];
    d.eta_hat += p.dini()->eta_hat;
    d.dini_integral = std::pow(std::pow(a.dini()->dini_integral, 1.0 / d.nu) + std::pow(p.dini()->dini_integral, 1.0 / d.nu), d.nu);
    d.divergent = a.dini()->divergent || p.dini()->divergent;
    d.tail_exponent = std::max(a.dini()->tail_exponent, p.dini()->tail_exponent);
    sum.set_dini(std::move(d));
  }
  return sum;
}

namespace {

struct WindowConstant {
  double value = 0.0;
  double sliver = 0.0;
  std::string method;
};

Matrix p_left(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, std::size_t k) {
  return p.at(u.time_grid()[k - 1]);
}

// ĉ on nodes (s, end] with the probe basis `basis` (empty: whole space).
WindowConstant c_hat_window(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, double mu,
                            std::size_t s, std::size_t end, const Matrix& basis, const opalg::ProbeOptions& opts) {
  const Vector& w = u.norms().weights;
  WindowConstant out;
  Vector xstar;
  if (mu == 2.0) {
    auto h = evofam::gram_sweep(
        u,
        [&](std::size_t k) {
          Matrix pk = p_left(p, u, k);
          return Matrix(pk.transpose() * w.asDiagonal() * pk);
        },
        end);
    Matrix m;
    if (basis.size() == 0) {
      Vector r = w.array().rsqrt();
      m = r.asDiagonal() * h[s] * r.asDiagonal();
    } else {
      m = basis.transpose() * h[s] * basis;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    Index top = es.eigenvalues().size() - 1;
    out.value = std::sqrt(std::max(0.0, es.eigenvalues()(top)));
    Vector v = es.eigenvectors().col(top);
    xstar = basis.size() == 0 ? Vector(w.array().rsqrt().matrix().asDiagonal() * v) : Vector(basis * v);
    out.method = "svd-exact";
  } else {
    auto map = evofam::observed_map(u, s, end, [&](std::size_t k) { return p_left(p, u, k); }, w, mu);
    auto o = opts;
    o.subspace = basis;
    auto est = opalg::maximize_ratio(map, o);
    out.value = est.value;
    if (!est.maximizer.empty()) xstar = est.maximizer[0];
    out.method = est.method;
  }
  if (xstar.size() > 0) {
    double nx = weighted_norm(xstar, w);
    Vector px = p.at(u.time_grid()[s]) * xstar;
    if (nx > 0) out.sliver = std::pow(u.dt(s), 1.0 / mu) * weighted_norm(px, w) / nx;
  }
  return out;
}

void check_mu(double mu) {
  if (!(mu > 1.0) || !std::isfinite(mu)) throw PreconditionError("h2_constant: mu must lie in (1, inf)");
}

}  // namespace

H2Report h2_profile(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, double mu, double s,
                    const std::vector<double>& tau_primes, const opalg::ProbeOptions& opts) {
  check_mu(mu);
  if (p.size() != u.size()) throw PreconditionError("h2_constant: P and U differ in dimension");
  const std::size_t is = u.index_of(s);
  Matrix basis = opalg::d_probe_basis(u.norms());
  H2Report r;
  r.mu = mu;
  r.probes = mu == 2.0 ? 0 : opts.probes;
  r.seed = opts.seed;
  for (double tp : tau_primes) {
    if (tp >= u.time_grid().back() * (1 - 1e-14)) {
      std::ostringstream msg;
      msg << "h2_constant: tau' = " << tp << " must be < tau = " << u.time_grid().back();
      throw PreconditionError(msg.str());
    }
    std::size_t ie = u.index_of(tp);
    if (ie <= is) throw PreconditionError("h2_constant: need s < tau'");
    auto c = c_hat_window(p, u, mu, is, ie, basis, opts);
    r.intervals.emplace_back(s, tp);
    r.c_hat.push_back(c.value);
    r.sliver.push_back(c.sliver);
    r.method = c.method;
  }
  return r;
}

H2Report h2_constant(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u, double mu, double s,
                     double tau_prime, const opalg::ProbeOptions& opts) {
  return h2_profile(p, u, mu, s, {tau_prime}, opts);
}

std::vector<double> h2_full_space_profile(const opalg::OperatorFamily& p, const evofam::EvolutionFamily& u,
                                          std::size_t end) {
  const Vector& w = u.norms().weights;
  auto h = evofam::gram_sweep(
      u,
      [&](std::size_t k) {
        Matrix pk = p_left(p, u, k);
        return Matrix(pk.transpose() * w.asDiagonal() * pk);
      },
      end);
  std::vector<double> c(end);
  for (std::size_t r = 0; r < end; ++r) c[r] = opalg::gram_gain(h[r], w, Matrix());
  return c;
}

namespace {

// f ↦ (P(t_{k-1}) u_k)_{k=a+1..e} with u the zero-start solution of u̇ + A u = f.
opalg::LinearTrajectoryMap contraction_map(const evofam::EvolutionFamily& u, const opalg::OperatorFamily& p,
                                           std::size_t a, std::size_t e, double q) {
  auto pk = std::make_shared<std::vector<Matrix>>();
  for (std::size_t k = a + 1; k <= e; ++k) pk->push_back(p_left(p, u, k));
  const evofam::EvolutionFamily* up = &u;
  opalg::LinearTrajectoryMap map;
  map.input.p = q;
  map.input.space_weights = u.norms().weights;
  for (std::size_t k = a + 1; k <= e; ++k) map.input.time_weights.push_back(u.dt(k - 1));
  map.outputs = {map.input};
  map.forward = [up, pk, a, e](const Trajectory& f) {
    Trajectory y;
    y.reserve(e - a);
    Vector cur = Vector::Zero(up->size());
    for (std::size_t k = a; k < e; ++k) {
      cur = up->step(k) * cur + up->dt(k) * (up->resolvent(k) * f[k - a]);
      y.push_back((*pk)[k - a] * cur);
    }
    return std::vector<Trajectory>{std::move(y)};
  };
  map.adjoint = [up, pk, a, e](const std::vector<Trajectory>& g) {
    const std::size_t m = e - a;
    Trajectory grad(m);
    Vector lam = (*pk)[m - 1].transpose() * g[0][m - 1];
    for (std::size_t i = m; i-- > 0;) {
      std::size_t k = a + i;
      grad[i] = up->dt(k) * (up->resolvent(k).transpose() * lam);
      if (i > 0) lam = (*pk)[i - 1].transpose() * g[0][i - 1] + up->step(k).transpose() * lam;
    }
    return grad;
  };
  return map;
}

}  // namespace

ContractionReport neumann_contraction(const evofam::EvolutionFamily& u, const opalg::OperatorFamily& p, double a,
                                      double b, double q, const opalg::ProbeOptions& opts, int lengths) {
  if (!(q > 1.0)) throw PreconditionError("neumann_contraction: q must exceed 1");
  if (lengths < 1) throw PreconditionError("neumann_contraction: need at least one length");
  const std::size_t ia = u.index_of(a), ib = u.index_of(b);
  if (ib <= ia) throw PreconditionError("neumann_contraction: need a < b");
  ContractionReport r;
  r.a = a, r.b = b, r.q = q;
  const double qd = q / (q - 1.0);
  bool below = true;
  for (int m = 1; m <= lengths; ++m) {
    std::size_t ie = ia + std::max<std::size_t>(1, (ib - ia) * static_cast<std::size_t>(m) / static_cast<std::size_t>(lengths));
    if (!r.lengths.empty() && u.time_grid()[ie] - a <= r.lengths.back()) continue;
    double len = u.time_grid()[ie] - a;
    auto est = opalg::maximize_ratio(contraction_map(u, p, ia, ie, q), opts);

    double cmax = 0.0;
    if (q == 2.0) {
      auto c = h2_full_space_profile(p, u, ie);
      for (std::size_t s = ia; s < ie; ++s) cmax = std::max(cmax, c[s]);
    } else {
      for (std::size_t s = ia; s < ie; ++s)
        cmax = std::max(cmax, c_hat_window(p, u, q, s, ie, Matrix(), opts).value);
    }
    r.lengths.push_back(len);
    r.norms.push_back(est.value);
    r.bounds.push_back(std::pow(len, 1.0 / qd) * cmax);
    if (below && est.value < 1.0) r.critical_length = len;
    if (est.value >= 1.0) below = false;
  }
  r.norm = r.norms.back();
  r.bound = r.bounds.back();
  r.all_below_one = below;
  return r;
}

namespace {

// x ↦ f with f_{k+1} = −P(t_k) ū_{k+1}, ū = u_{k+1} (IE) or (u_k + u_{k+1})/2 (CN), u = U(·, s)x.
struct GapSource {
  const evofam::EvolutionFamily* u;
  std::vector<Matrix> pk;  // P(t_k), k = s..K-1
  std::size_t s;
  bool cn;

  Trajectory forward(const Vector& x) const {
    const std::size_t kk = u->steps();
    Trajectory f;
    f.reserve(kk - s + 1);
    f.push_back(Vector::Zero(x.size()));  // node s: unused by the scheme
    Vector cur = x;
    for (std::size_t k = s; k < kk; ++k) {
      Vector next = u->step(k) * cur;
      f.push_back(-(pk[k - s] * (cn ? Vector(0.5 * (cur + next)) : next)));
      cur = std::move(next);
    }
    return f;
  }

  // g: gradient with respect to f_{s+1..K}.
  Vector adjoint(const Trajectory& g) const {
    const std::size_t kk = u->steps();
    Trajectory ubar(kk - s + 1, Vector::Zero(u->size()));
    for (std::size_t k = s; k < kk; ++k) {
      Vector c = -(pk[k - s].transpose() * g[k - s]);
      if (cn) {
        ubar[k - s + 1] += 0.5 * c;
        ubar[k - s] += 0.5 * c;
      } else {
        ubar[k - s + 1] += c;
      }
    }
    Vector lam = ubar[kk - s];
    for (std::size_t k = kk; k-- > s;) lam = ubar[k - s] + u->step(k).transpose() * lam;
    return lam;
  }
};

}  // namespace

GapReport mr_gap_bound(const PerturbedPair& pair, double q, double s, const opalg::ProbeOptions& opts) {
  if (!(q > 1.0)) throw PreconditionError("mr_gap_bound: q must exceed 1");
  const auto& u = *pair.u;
  const auto& v = *pair.v_direct;
  const std::size_t is = u.index_of(s), kk = u.steps();
  if (is >= kk) throw PreconditionError("mr_gap_bound: s must be before the final node");
  auto src = std::make_shared<GapSource>();
  src->u = &u;
  src->s = is;
  src->cn = u.scheme() == evofam::Scheme::CrankNicolson;
  for (std::size_t k = is; k < kk; ++k) src->pk.push_back(pair.p->at(u.time_grid()[k]));

  auto mr = evofam::mr_map(v, q, is, kk);
  opalg::LinearTrajectoryMap gap;
  gap.input.time_weights = {1.0};
  gap.input.space_weights = u.norms().weights;
  gap.input.p = q;
  gap.outputs = mr.outputs;
  gap.forward = [src, mr](const Trajectory& x) {
    Trajectory f = src->forward(x[0]);
    return mr.forward(Trajectory(f.begin() + 1, f.end()));
  };
  gap.adjoint = [src, mr](const std::vector<Trajectory>& g) { return Trajectory{src->adjoint(mr.adjoint(g))}; };

  Matrix basis = opalg::d_probe_basis(u.norms());
  auto o = opts;
  o.subspace = basis;
  auto est = opalg::maximize_ratio(gap, o);

  GapReport r;
  r.gap = est.value;
  Vector xstar = est.maximizer.empty() ? Vector::Zero(u.size()) : est.maximizer[0];
  double nx = weighted_norm(xstar, u.norms().weights);

  auto kappa = evofam::mr_constant(v, q, is, kk, opts);
  r.kappa = kappa.value;
  if (nx > 0) {
    Trajectory f = src->forward(xstar);
    auto sol = evofam::solve_nonhomogeneous(v, f, is, kk, q);
    r.deriv = sol.deriv_lp / nx;
    r.alu = sol.alu_lp / nx;
    r.u = sol.u_lp / nx;
    double fn = mr.input.norm(Trajectory(f.begin() + 1, f.end()));
    if (fn > 0) r.kappa = std::max(r.kappa, sol.mr_norm / fn);  // the gap source is one more MR probe
  }
  r.c_hat = c_hat_window(*pair.p, u, q, is, kk, basis, opts).value;
  r.product = r.kappa * r.c_hat;
  r.holds = r.gap <= r.product * (1 + 1e-9);
  return r;
}

}  // namespace evolab::perturb
