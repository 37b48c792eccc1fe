#include "evolab/error.hpp"
#include "evolab/opalg/norms.hpp"
#include "evolab/perturb/perturb.hpp"

#include <algorithm>

namespace evolab::perturb {

VolterraTable volterra_solve(const evofam::EvolutionFamily& u, const opalg::OperatorFamily& p, std::size_t stride) {
  const std::size_t kk = u.steps();
  const Index n = u.size();
  if (p.size() != n) throw PreconditionError("volterra_solve: P and U differ in dimension");
  for (std::size_t k = 0; k < kk; ++k)
    if (u.dt(k) < 1e-12) throw NumericalError("volterra_solve: quadrature weight underflow (dt < 1e-12)");
  if (stride == 0) stride = std::max<std::size_t>(1, kk / 8);

  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < kk; k += stride) nodes.push_back(k);
  nodes.push_back(kk);

  const Matrix id = Matrix::Identity(n, n);
  std::vector<Matrix> pk(kk + 1), solve(kk);
  for (std::size_t k = 0; k <= kk; ++k) pk[k] = p.at(u.time_grid()[k]);
  for (std::size_t k = 0; k < kk; ++k) solve[k] = (id + 0.5 * u.dt(k) * pk[k]).inverse();

  std::vector<std::vector<Matrix>> table(nodes.size());
  for (std::size_t jr = 0; jr < nodes.size(); ++jr) {
    const std::size_t j = nodes[jr];
    table[jr].assign(jr + 1, Matrix());
    table[jr][jr] = id;
    std::size_t ir = jr;  // next report position to fill is ir - 1
    Matrix ucur = id;     // U(t_j, t_{i+1})
    Matrix xp = pk[j];    // X_{i+1} P_{i+1}
    Matrix t = Matrix::Zero(n, n);
    for (std::size_t i = j; i-- > 0;) {
      const double h2 = 0.5 * u.dt(i);
      ucur = ucur * u.step(i);
      Matrix gs = (t + h2 * xp) * u.step(i);
      Matrix x = (ucur - gs) * solve[i];
      xp = x * pk[i];
      t = gs + h2 * xp;
      if (ir > 0 && nodes[ir - 1] == i) table[jr][--ir] = x;
    }
  }
  return VolterraTable(std::move(nodes), std::move(table));
}

double perturbation_consistency(const PerturbedPair& pair) {
  if (!pair.v_volterra) throw PreconditionError("perturbation_consistency: pair has no Volterra table");
  const auto& tab = *pair.v_volterra;
  const auto& w = pair.u->norms().weights;
  double d = 0.0;
  const auto& nodes = tab.report_nodes();
  for (std::size_t jr = 0; jr < nodes.size(); ++jr)
    for (std::size_t ir = 0; ir < jr; ++ir)
      d = std::max(d, opalg::x_operator_norm(tab.at(jr, ir) - pair.v_direct->propagator(nodes[jr], nodes[ir]), w, w));
  return d;
}

PerturbedPair make_perturbed_pair(std::shared_ptr<const opalg::OperatorFamily> a,
                                  std::shared_ptr<const opalg::OperatorFamily> p, const std::vector<double>& t_grid,
                                  evofam::Scheme scheme, bool with_volterra, std::size_t stride) {
  PerturbedPair pair;
  auto ap = std::make_shared<const opalg::OperatorFamily>(perturbed_family(*a, *p));
  pair.u = std::make_shared<const evofam::EvolutionFamily>(evofam::propagate(a, t_grid, scheme));
  pair.v_direct = std::make_shared<const evofam::EvolutionFamily>(evofam::propagate(ap, t_grid, scheme));
  pair.p = p;
  if (with_volterra) {
    pair.v_volterra = volterra_solve(*pair.u, *p, stride);
    pair.discrepancy = perturbation_consistency(pair);
  }
  return pair;
}

std::vector<evofam::LadderRung> consistency_ladder(std::shared_ptr<const opalg::OperatorFamily> a,
                                                   std::shared_ptr<const opalg::OperatorFamily> p, double dt0,
                                                   int rungs, evofam::Scheme scheme) {
  if (rungs < 1) throw PreconditionError("consistency_ladder: rungs must be positive");
  std::vector<evofam::LadderRung> out;
  double dt = dt0;
  for (int r = 0; r < rungs; ++r, dt /= 2) {
    auto grid = opalg::uniform_time_grid(a->tau(), dt);
    std::size_t kk = grid.size() - 1;
    if (kk % 8 != 0) throw PreconditionError("consistency_ladder: tau/dt must be a multiple of 8");
    auto pair = make_perturbed_pair(a, p, grid, scheme, true, kk / 8);
    out.push_back({a->tau() / static_cast<double>(kk), pair.discrepancy, 0.0});
  }
  evofam::fill_orders(out);
  return out;
}

}  // namespace evolab::perturb
