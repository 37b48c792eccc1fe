#include "evolab/opalg/family.hpp"

#include "evolab/error.hpp"

#include <algorithm>
#include <cmath>

namespace evolab::opalg {

OperatorFamily::OperatorFamily(std::vector<double> time_grid, std::vector<DiscreteOperator> samples,
                               Interpolation interpolation)
    : time_grid_(std::move(time_grid)), samples_(std::move(samples)), interpolation_(interpolation) {
  if (time_grid_.empty() || time_grid_.size() != samples_.size())
    throw PreconditionError("OperatorFamily: one sample per time node required");
  if (time_grid_.front() != 0.0) throw PreconditionError("OperatorFamily: time grid must start at 0");
  for (std::size_t k = 1; k < time_grid_.size(); ++k)
    if (!(time_grid_[k] > time_grid_[k - 1]))
      throw PreconditionError("OperatorFamily: time grid must be strictly increasing");
  const Index n = samples_.front().size();
  for (const auto& s : samples_)
    if (s.matrix.rows() != n || s.matrix.cols() != n)
      throw PreconditionError("OperatorFamily: samples differ in dimension");
}

OperatorFamily OperatorFamily::constant(const DiscreteOperator& op, double tau) {
  if (!(tau > 0)) throw PreconditionError("OperatorFamily::constant: tau must be positive");
  return OperatorFamily({0.0, tau}, {op, op}, Interpolation::PiecewiseConstantLeft);
}

Matrix OperatorFamily::at(double t) const {
  if (samples_.size() == 1 || t <= time_grid_.front()) return samples_.front().matrix;
  if (t >= time_grid_.back()) return samples_.back().matrix;
  auto it = std::upper_bound(time_grid_.begin(), time_grid_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - time_grid_.begin()) - 1;
  if (interpolation_ == Interpolation::PiecewiseConstantLeft) return samples_[k].matrix;
  double th = (t - time_grid_[k]) / (time_grid_[k + 1] - time_grid_[k]);
  if (th == 0.0) return samples_[k].matrix;
  return (1.0 - th) * samples_[k].matrix + th * samples_[k + 1].matrix;
}

DiscreteOperator OperatorFamily::operator_at(double t) const {
  DiscreteOperator op = samples_.front();
  op.matrix = at(t);
  return op;
}

OperatorFamily OperatorFamily::scaled(double lambda) const {
  auto s = samples_;
  for (auto& op : s) op.matrix *= lambda;
  return OperatorFamily(time_grid_, std::move(s), interpolation_);
}

std::vector<double> uniform_time_grid(double tau, double dt) {
  if (!(dt > 0)) throw PreconditionError("uniform_time_grid: dt must be positive");
  if (!(tau > 0)) throw PreconditionError("uniform_time_grid: tau must be positive");
  long k = std::max(1L, std::lround(tau / dt));
  std::vector<double> g(static_cast<std::size_t>(k) + 1);
  for (long i = 0; i <= k; ++i) g[i] = tau * static_cast<double>(i) / static_cast<double>(k);
  return g;
}

}  // namespace evolab::opalg
