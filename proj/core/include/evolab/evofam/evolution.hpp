#pragma once

#include "evolab/linalg.hpp"
#include "evolab/opalg/family.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace evolab::evofam {

enum class Scheme { ImplicitEuler, CrankNicolson };
std::string to_string(Scheme s);
/// "ie" / "implicit-euler" / "cn" / "crank-nicolson".
Scheme scheme_from_string(const std::string& s);

/// U(t_j, t_i), j ≥ i, on the stepper grid, as products of one-step maps
///   implicit Euler:   S_k = (I + h_k A(t_k))^{-1}
///   Crank–Nicolson:   S_k = (I + h_k/2 A(t_k))^{-1} (I − h_k/2 A(t_k))
/// with A evaluated at the left endpoint. Anchor columns U(·, t_i) are memoized on
/// demand (thread-safe) up to a byte budget; older columns are evicted first.
class EvolutionFamily {
 public:
  EvolutionFamily(std::shared_ptr<const opalg::OperatorFamily> family, std::vector<double> time_grid, Scheme scheme);

  const std::vector<double>& time_grid() const { return time_grid_; }
  std::size_t steps() const { return time_grid_.size() - 1; }
  double dt(std::size_t k) const { return time_grid_[k + 1] - time_grid_[k]; }
  Scheme scheme() const { return scheme_; }
  const opalg::OperatorFamily& family() const { return *family_; }
  std::shared_ptr<const opalg::OperatorFamily> family_ptr() const { return family_; }
  const opalg::NormSpec& norms() const { return family_->norms(); }
  Index size() const { return family_->size(); }

  /// One-step map S_k: t_k → t_{k+1}, and the source resolvent R_k.
  const Matrix& step(std::size_t k) const { return steps_[k]; }
  const Matrix& resolvent(std::size_t k) const { return scheme_ == Scheme::ImplicitEuler ? steps_[k] : resolvents_[k]; }
  /// A(t_k) as used by the MR norms.
  Matrix generator(std::size_t k) const { return family_->at(time_grid_[k]); }

  /// Grid index of t; throws PreconditionError if t is not a node (relative tolerance 1e-12).
  std::size_t index_of(double t) const;

  /// U(t_j, t_i). Throws PreconditionError for j < i.
  Matrix propagator(std::size_t j, std::size_t i) const;
  /// U(t_k, t_i) x for k = i..K.
  Trajectory apply(std::size_t i, const Vector& x) const;
  /// Memoized anchor column U(t_k, t_i), k = i..K (entry 0 is the identity).
  std::shared_ptr<const std::vector<Matrix>> column(std::size_t i) const;

  void set_memo_budget(std::size_t bytes) { budget_ = bytes; }

 private:
  std::shared_ptr<const opalg::OperatorFamily> family_;
  std::vector<double> time_grid_;
  Scheme scheme_;
  std::vector<Matrix> steps_;
  std::vector<Matrix> resolvents_;  // Crank–Nicolson only

  struct Memo {
    std::mutex mutex;
    std::map<std::size_t, std::shared_ptr<const std::vector<Matrix>>> columns;
    std::vector<std::size_t> order;
  };
  std::unique_ptr<Memo> memo_ = std::make_unique<Memo>();
  std::size_t budget_ = std::size_t(512) << 20;
};

/// Builds the stepper on the nodes of `t_grid` from `s` on. Rejects non-increasing grids
/// (Δt ≤ 0), s off the grid, and singular step matrices (naming the step).
EvolutionFamily propagate(std::shared_ptr<const opalg::OperatorFamily> family, const std::vector<double>& t_grid,
                          Scheme scheme = Scheme::ImplicitEuler, double s = 0.0);

/// max over sampled i ≤ k ≤ j of ‖U(t_j,t_i) − U(t_j,t_k)U(t_k,t_i)‖_X, plus ‖U(t_i,t_i) − I‖.
double cocycle_residual(const EvolutionFamily& u, int triple_count, std::uint64_t seed = 0);

/// sup over the table (sampled anchors) of ‖U(t_j, t_i)‖_X.
double propagator_bound(const EvolutionFamily& u, int anchors = 8);

/// H_s = Σ_{s<k≤end} h_{k-1} U(t_k,s)ᵀ Q U(t_k,s) for every s ≤ end, by the backward
/// recursion H_s = S_sᵀ(h_s Q + H_{s+1}) S_s. Entry `end` is zero. Q may vary per node.
std::vector<Matrix> gram_sweep(const EvolutionFamily& u, const std::function<Matrix(std::size_t)>& q_at,
                               std::size_t end);

struct LadderRung {
  double dt = 0.0;
  double error = 0.0;
  double order = 0.0;  // log2(previous error / error); 0 on the first rung
};

/// ‖U_Δt(τ,0) − e^{−τA}‖ / ‖e^{−τA}‖ for a constant operator over `rungs` halvings of dt0.
std::vector<LadderRung> propagator_ladder(const opalg::DiscreteOperator& op, double tau, double dt0, int rungs,
                                          Scheme scheme);

/// Fills the order column of a ladder from its error column.
void fill_orders(std::vector<LadderRung>& ladder);

}  // namespace evolab::evofam
