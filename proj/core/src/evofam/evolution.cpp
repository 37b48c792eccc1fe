#include "evolab/evofam/evolution.hpp"

#include "evolab/error.hpp"
#include "evolab/evofam/expm.hpp"
#include "evolab/opalg/estimate.hpp"
#include "evolab/opalg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace evolab::evofam {

std::string to_string(Scheme s) { return s == Scheme::ImplicitEuler ? "implicit-euler" : "crank-nicolson"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "ie" || s == "implicit-euler") return Scheme::ImplicitEuler;
  if (s == "cn" || s == "crank-nicolson") return Scheme::CrankNicolson;
  throw PreconditionError("unknown scheme '" + s + "' (expected ie or cn)");
}

EvolutionFamily::EvolutionFamily(std::shared_ptr<const opalg::OperatorFamily> family, std::vector<double> time_grid,
                                 Scheme scheme)
    : family_(std::move(family)), time_grid_(std::move(time_grid)), scheme_(scheme) {
  if (!family_) throw PreconditionError("propagate: null family");
  if (time_grid_.size() < 2) throw PreconditionError("propagate: time grid needs at least two nodes");
  const Index n = family_->size();
  const Matrix id = Matrix::Identity(n, n);
  steps_.reserve(steps());
  if (scheme_ == Scheme::CrankNicolson) resolvents_.reserve(steps());
  for (std::size_t k = 0; k + 1 < time_grid_.size(); ++k) {
    double h = time_grid_[k + 1] - time_grid_[k];
    if (!(h > 0)) {
      std::ostringstream msg;
      msg << "propagate: step " << k << " has dt = " << h << " <= 0";
      throw PreconditionError(msg.str());
    }
    Matrix a = family_->at(time_grid_[k]);
    double c = scheme_ == Scheme::ImplicitEuler ? h : 0.5 * h;
    Eigen::PartialPivLU<Matrix> lu(id + c * a);
    double rc = lu.rcond();
    if (!(rc > 1e-14)) {
      std::ostringstream msg;
      msg << "propagate: singular step matrix at step " << k << " (t = " << time_grid_[k] << ", rcond = " << rc << ")";
      throw NumericalError(msg.str());
    }
    if (scheme_ == Scheme::ImplicitEuler) {
      steps_.push_back(lu.inverse());
    } else {
      Matrix r = lu.inverse();
      steps_.push_back(r * (id - c * a));
      resolvents_.push_back(std::move(r));
    }
  }
}

std::size_t EvolutionFamily::index_of(double t) const {
  auto it = std::lower_bound(time_grid_.begin(), time_grid_.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == time_grid_.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "time " << t << " is not a node of the stepper grid";
    throw PreconditionError(msg.str());
  }
  return static_cast<std::size_t>(it - time_grid_.begin());
}

Matrix EvolutionFamily::propagator(std::size_t j, std::size_t i) const {
  if (j < i || j >= time_grid_.size()) throw PreconditionError("propagator: need i <= j <= K");
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    if (auto it = memo_->columns.find(i); it != memo_->columns.end()) return (*it->second)[j - i];
  }
  Matrix u = Matrix::Identity(size(), size());
  for (std::size_t k = i; k < j; ++k) u = steps_[k] * u;
  return u;
}

Trajectory EvolutionFamily::apply(std::size_t i, const Vector& x) const {
  if (i >= time_grid_.size()) throw PreconditionError("apply: anchor index out of range");
  Trajectory out;
  out.reserve(time_grid_.size() - i);
  out.push_back(x);
  for (std::size_t k = i; k < steps(); ++k) out.push_back(steps_[k] * out.back());
  return out;
}

std::shared_ptr<const std::vector<Matrix>> EvolutionFamily::column(std::size_t i) const {
  if (i >= time_grid_.size()) throw PreconditionError("column: anchor index out of range");
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    if (auto it = memo_->columns.find(i); it != memo_->columns.end()) return it->second;
  }
  // Built outside the lock; a concurrent builder of the same column produces identical data.
  auto col = std::make_shared<std::vector<Matrix>>();
  col->reserve(time_grid_.size() - i);
  col->push_back(Matrix::Identity(size(), size()));
  for (std::size_t k = i; k < steps(); ++k) col->push_back(steps_[k] * col->back());

  std::lock_guard<std::mutex> lock(memo_->mutex);
  if (auto it = memo_->columns.find(i); it != memo_->columns.end()) return it->second;
  const std::size_t per = static_cast<std::size_t>(size() * size()) * sizeof(double);
  auto bytes_of = [&](std::size_t anchor) { return (time_grid_.size() - anchor) * per; };
  std::size_t used = 0;
  for (auto& [a, _] : memo_->columns) used += bytes_of(a);
  auto& order = memo_->order;
  while (!order.empty() && used + bytes_of(i) > budget_) {
    used -= bytes_of(order.front());
    memo_->columns.erase(order.front());
    order.erase(order.begin());
  }
  if (used + bytes_of(i) <= budget_) {
    memo_->columns.emplace(i, col);
    order.push_back(i);
  }
  return col;
}

EvolutionFamily propagate(std::shared_ptr<const opalg::OperatorFamily> family, const std::vector<double>& t_grid,
                          Scheme scheme, double s) {
  if (t_grid.size() < 2) throw PreconditionError("propagate: time grid needs at least two nodes");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) {
      std::ostringstream msg;
      msg << "propagate: dt <= 0 between nodes " << k - 1 << " and " << k;
      throw PreconditionError(msg.str());
    }
  auto it = std::find_if(t_grid.begin(), t_grid.end(),
                         [&](double t) { return std::abs(t - s) <= 1e-12 * std::max(1.0, std::abs(s)); });
  if (it == t_grid.end()) throw PreconditionError("propagate: s is not a node of the time grid");
  return EvolutionFamily(std::move(family), std::vector<double>(it, t_grid.end()), scheme);
}

double cocycle_residual(const EvolutionFamily& u, int triple_count, std::uint64_t seed) {
  const auto& w = u.norms().weights;
  const std::size_t kk = u.steps();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kk);
  double r = 0.0;
  for (int t = 0; t < triple_count; ++t) {
    std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    std::size_t i = std::min({a, b, c}), j = std::max({a, b, c}), k = a + b + c - i - j;
    Matrix lhs = u.propagator(j, i);
    Matrix rhs = u.propagator(j, k) * u.propagator(k, i);
    r = std::max(r, opalg::x_operator_norm(lhs - rhs, w, w));
    Matrix id = Matrix::Identity(u.size(), u.size());
    r = std::max(r, opalg::x_operator_norm(u.propagator(i, i) - id, w, w));
  }
  return r;
}

double propagator_bound(const EvolutionFamily& u, int anchors) {
  const auto& w = u.norms().weights;
  double sup = 0.0;
  const std::size_t kk = u.steps();
  for (int m = 0; m < anchors; ++m) {
    std::size_t i = static_cast<std::size_t>(m) * kk / static_cast<std::size_t>(std::max(1, anchors));
    Matrix p = Matrix::Identity(u.size(), u.size());
    for (std::size_t k = i; k < kk; ++k) {
      p = u.step(k) * p;
      // Checking every node is O(K n^3); a geometric subset of targets suffices for the sup trend.
      std::size_t d = k + 1 - i;
      if ((d & (d - 1)) == 0 || k + 1 == kk) sup = std::max(sup, opalg::x_operator_norm(p, w, w));
    }
  }
  return std::max(sup, 1.0);
}

std::vector<Matrix> gram_sweep(const EvolutionFamily& u, const std::function<Matrix(std::size_t)>& q_at,
                               std::size_t end) {
  if (end > u.steps()) throw PreconditionError("gram_sweep: end index out of range");
  std::vector<Matrix> h(end + 1);
  h[end] = Matrix::Zero(u.size(), u.size());
  for (std::size_t s = end; s-- > 0;) {
    Matrix inner = u.dt(s) * q_at(s + 1) + h[s + 1];
    h[s] = u.step(s).transpose() * inner * u.step(s);
    h[s] = 0.5 * (h[s] + h[s].transpose());
  }
  return h;
}

void fill_orders(std::vector<LadderRung>& ladder) {
  for (std::size_t r = 0; r < ladder.size(); ++r) {
    ladder[r].order = 0.0;
    if (r > 0 && ladder[r].error > 0 && ladder[r - 1].error > 0)
      ladder[r].order = std::log(ladder[r - 1].error / ladder[r].error) / std::log(ladder[r - 1].dt / ladder[r].dt);
  }
}

std::vector<LadderRung> propagator_ladder(const opalg::DiscreteOperator& op, double tau, double dt0, int rungs,
                                          Scheme scheme) {
  if (rungs < 1) throw PreconditionError("propagator_ladder: rungs must be positive");
  Matrix exact = expm_oracle(op, tau);
  const auto& w = op.norms->weights;
  double en = opalg::x_operator_norm(exact, w, w);
  auto fam = std::make_shared<const opalg::OperatorFamily>(opalg::OperatorFamily::constant(op, tau));
  std::vector<LadderRung> out;
  double dt = dt0;
  for (int r = 0; r < rungs; ++r, dt /= 2) {
    auto u = propagate(fam, opalg::uniform_time_grid(tau, dt), scheme);
    Matrix p = u.propagator(u.steps(), 0);
    out.push_back({tau / static_cast<double>(u.steps()), opalg::x_operator_norm(p - exact, w, w) / en, 0.0});
  }
  fill_orders(out);
  return out;
}

}  // namespace evolab::evofam
