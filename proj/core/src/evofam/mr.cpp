#include "evolab/evofam/mr.hpp"

#include "evolab/error.hpp"

#include <cmath>

namespace evolab::evofam {

namespace {

opalg::BochnerSpace node_space(const EvolutionFamily& u, std::size_t a, std::size_t b, double p) {
  opalg::BochnerSpace s;
  s.p = p;
  s.space_weights = u.norms().weights;
  for (std::size_t k = a + 1; k <= b; ++k) s.time_weights.push_back(u.dt(k - 1));
  return s;
}

void check_window(const EvolutionFamily& u, std::size_t a, std::size_t b, double p) {
  if (!(a < b) || b > u.steps()) throw PreconditionError("MR window needs a < b <= K");
  if (!(p > 1.0)) throw PreconditionError("MR exponent p must exceed 1");
}

// Outputs (d_k, A_k u_k, u_k) for k = a+1..b from u_a..u_b.
std::vector<Trajectory> mr_outputs(const Trajectory& traj, std::size_t a, const EvolutionFamily& u,
                                   const std::vector<Matrix>& gen) {
  const std::size_t m = traj.size() - 1;
  std::vector<Trajectory> y(3, Trajectory(m));
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t k = a + 1 + i;
    y[0][i] = (traj[i + 1] - traj[i]) / u.dt(k - 1);
    y[1][i] = gen[i] * traj[i + 1];
    y[2][i] = traj[i + 1];
  }
  return y;
}

std::vector<Matrix> generators(const EvolutionFamily& u, std::size_t a, std::size_t b) {
  std::vector<Matrix> g;
  g.reserve(b - a);
  for (std::size_t k = a + 1; k <= b; ++k) g.push_back(u.generator(k));
  return g;
}

// Adjoint of traj ↦ (d, A u, u) with respect to u_{a+1}..u_b (u_a fixed).
Trajectory outputs_adjoint(const std::vector<Trajectory>& g, std::size_t a, const EvolutionFamily& u,
                           const std::vector<Matrix>& gen) {
  const std::size_t m = g[0].size();
  Trajectory ubar(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t k = a + 1 + i;
    ubar[i] = g[2][i] + gen[i].transpose() * g[1][i] + g[0][i] / u.dt(k - 1);
    if (i + 1 < m) ubar[i] -= g[0][i + 1] / u.dt(k);
  }
  return ubar;
}

}  // namespace

MRSolution mr_components(const EvolutionFamily& u, Trajectory traj, std::size_t a, double p) {
  if (traj.size() < 2) throw PreconditionError("mr_components: trajectory needs at least two nodes");
  std::size_t b = a + traj.size() - 1;
  check_window(u, a, b, p);
  auto space = node_space(u, a, b, p);
  auto y = mr_outputs(traj, a, u, generators(u, a, b));
  MRSolution s;
  s.p = p;
  s.deriv_lp = space.norm(y[0]);
  s.alu_lp = space.norm(y[1]);
  s.u_lp = space.norm(y[2]);
  s.mr_norm = s.deriv_lp + s.alu_lp + s.u_lp;
  for (std::size_t k = a; k <= b; ++k) s.times.push_back(u.time_grid()[k]);
  s.trajectory = std::move(traj);
  return s;
}

MRSolution solve_nonhomogeneous(const EvolutionFamily& u, const Trajectory& f, std::size_t a, std::size_t b,
                                double p) {
  check_window(u, a, b, p);
  if (f.size() != b - a + 1) throw PreconditionError("solve_nonhomogeneous: f must hold one vector per node a..b");
  Trajectory traj;
  traj.reserve(b - a + 1);
  traj.push_back(Vector::Zero(u.size()));
  for (std::size_t k = a; k < b; ++k) traj.push_back(u.step(k) * traj.back() + u.dt(k) * (u.resolvent(k) * f[k - a + 1]));
  return mr_components(u, std::move(traj), a, p);
}

MRSolution solve_nonhomogeneous(std::shared_ptr<const opalg::OperatorFamily> family, const std::vector<double>& t_grid,
                                const Trajectory& f, double a, double b, double p, Scheme scheme) {
  auto u = propagate(std::move(family), t_grid, scheme);
  std::size_t ia = u.index_of(a), ib = u.index_of(b);
  Trajectory fw(f.begin() + static_cast<long>(ia), f.begin() + static_cast<long>(ib) + 1);
  return solve_nonhomogeneous(u, fw, ia, ib, p);
}

opalg::LinearTrajectoryMap mr_map(const EvolutionFamily& u, double p, std::size_t a, std::size_t b) {
  check_window(u, a, b, p);
  auto gen = std::make_shared<const std::vector<Matrix>>(generators(u, a, b));
  const EvolutionFamily* up = &u;
  opalg::LinearTrajectoryMap map;
  map.input = node_space(u, a, b, p);
  map.outputs = {map.input, map.input, map.input};
  map.forward = [up, gen, a, b](const Trajectory& f) {
    Trajectory traj;
    traj.reserve(b - a + 1);
    traj.push_back(Vector::Zero(up->size()));
    for (std::size_t k = a; k < b; ++k)
      traj.push_back(up->step(k) * traj.back() + up->dt(k) * (up->resolvent(k) * f[k - a]));
    return mr_outputs(traj, a, *up, *gen);
  };
  map.adjoint = [up, gen, a, b](const std::vector<Trajectory>& g) {
    Trajectory ubar = outputs_adjoint(g, a, *up, *gen);
    const std::size_t m = b - a;
    Trajectory grad(m);
    Vector lam = ubar[m - 1];
    for (std::size_t i = m; i-- > 0;) {
      std::size_t k = a + i;  // step k maps node k to node k+1 = a+1+i
      grad[i] = up->dt(k) * (up->resolvent(k).transpose() * lam);
      if (i > 0) lam = ubar[i - 1] + up->step(k).transpose() * lam;
    }
    return grad;
  };
  return map;
}

ConstantEstimate mr_constant(const EvolutionFamily& u, double p, std::size_t a, std::size_t b,
                             const opalg::ProbeOptions& opts) {
  auto map = mr_map(u, p, a, b);
  auto o = opts;
  o.smooth = true;
  o.subspace = Matrix();
  auto est = opalg::maximize_ratio(map, o);
  return {est.value, est.method, est.probes, est.running_max, opts.seed};
}

ConstantEstimate smoothing_constant(const EvolutionFamily& u, double q, const opalg::ProbeOptions& opts) {
  const std::size_t kk = u.steps();
  check_window(u, 0, kk, q);
  auto gen = std::make_shared<const std::vector<Matrix>>(generators(u, 0, kk));
  const EvolutionFamily* up = &u;
  const double t0 = u.time_grid().front();
  opalg::LinearTrajectoryMap map;
  map.input.time_weights = {1.0};
  map.input.space_weights = u.norms().weights;
  map.input.p = q;
  auto space = node_space(u, 0, kk, q);
  map.outputs = {space, space, space};
  map.forward = [up, gen, kk, t0](const Trajectory& x) {
    Trajectory v;
    v.reserve(kk + 1);
    v.push_back(Vector::Zero(up->size()));
    Vector cur = x[0];
    for (std::size_t k = 0; k < kk; ++k) {
      cur = up->step(k) * cur;
      v.push_back((up->time_grid()[k + 1] - t0) * cur);
    }
    return mr_outputs(v, 0, *up, *gen);
  };
  map.adjoint = [up, gen, kk, t0](const std::vector<Trajectory>& g) {
    Trajectory ubar = outputs_adjoint(g, 0, *up, *gen);
    Vector lam = (up->time_grid()[kk] - t0) * ubar[kk - 1];
    for (std::size_t k = kk - 1; k >= 1; --k) lam = (up->time_grid()[k] - t0) * ubar[k - 1] + up->step(k).transpose() * lam;
    return Trajectory{up->step(0).transpose() * lam};
  };
  auto o = opts;
  o.smooth = false;
  auto est = opalg::maximize_ratio(map, o);
  return {est.value, est.method, est.probes, est.running_max, opts.seed};
}

}  // namespace evolab::evofam

namespace evolab::evofam {

opalg::LinearTrajectoryMap observed_map(const EvolutionFamily& u, std::size_t s, std::size_t end,
                                        const std::function<Matrix(std::size_t)>& out_at, const Vector& y_weights,
                                        double theta) {
  if (!(s < end) || end > u.steps()) throw PreconditionError("observed_map: need s < end <= K");
  if (!(theta > 1.0)) throw PreconditionError("observed_map: exponent must exceed 1");
  auto outs = std::make_shared<std::vector<Matrix>>();
  for (std::size_t k = s + 1; k <= end; ++k) outs->push_back(out_at(k));
  const EvolutionFamily* up = &u;
  opalg::LinearTrajectoryMap map;
  map.input.time_weights = {1.0};
  map.input.space_weights = u.norms().weights;
  map.input.p = theta;
  opalg::BochnerSpace y;
  y.p = theta;
  y.space_weights = y_weights;
  for (std::size_t k = s + 1; k <= end; ++k) y.time_weights.push_back(u.dt(k - 1));
  map.outputs = {y};
  map.forward = [up, outs, s, end](const Trajectory& x) {
    Trajectory out;
    out.reserve(end - s);
    Vector cur = x[0];
    for (std::size_t k = s; k < end; ++k) {
      cur = up->step(k) * cur;
      out.push_back((*outs)[k - s] * cur);
    }
    return std::vector<Trajectory>{std::move(out)};
  };
  map.adjoint = [up, outs, s, end](const std::vector<Trajectory>& g) {
    const auto& gy = g[0];
    Vector lam = (*outs)[end - s - 1].transpose() * gy[end - s - 1];
    for (std::size_t k = end - 1; k > s; --k) lam = (*outs)[k - s - 1].transpose() * gy[k - s - 1] + up->step(k).transpose() * lam;
    return Trajectory{up->step(s).transpose() * lam};
  };
  return map;
}

}  // namespace evolab::evofam
