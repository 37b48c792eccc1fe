#include "evolab/opalg/estimate.hpp"

#include "evolab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace evolab::opalg {

double BochnerSpace::norm(const Trajectory& g) const {
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < g.size(); ++k) s += time_weights[k] * (space_weights.array() * g[k].array().square()).sum();
    return std::sqrt(s);
  }
  for (std::size_t k = 0; k < g.size(); ++k) s += time_weights[k] * std::pow(weighted_norm(g[k], space_weights), p);
  return std::pow(s, 1.0 / p);
}

Trajectory BochnerSpace::gradient(const Trajectory& y) const {
  Trajectory out = zeros();
  double total = norm(y);
  if (total == 0.0) return out;
  double scale = std::pow(total, p - 1.0);
  for (std::size_t k = 0; k < y.size(); ++k) {
    double nk = weighted_norm(y[k], space_weights);
    if (nk == 0.0) continue;
    double f = time_weights[k] * std::pow(nk, p - 2.0) / scale;
    out[k] = f * (space_weights.array() * y[k].array()).matrix();
  }
  return out;
}

Trajectory BochnerSpace::dual_direction(const Trajectory& z) const {
  const double pd = p / (p - 1.0);
  Trajectory g = zeros();
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (time_weights[k] == 0.0) continue;
    Vector zeta = (z[k].array() / space_weights.array()).matrix() / time_weights[k];
    double nz = weighted_norm(zeta, space_weights);
    if (nz == 0.0) continue;
    g[k] = std::pow(nz, pd - 2.0) * zeta;
  }
  double ng = norm(g);
  if (ng == 0.0) return g;
  for (auto& v : g) v /= ng;
  return g;
}

Trajectory BochnerSpace::zeros() const { return Trajectory(nodes(), Vector::Zero(dim())); }

Vector gaussian_vector(Index n, std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

namespace {

double numerator(const LinearTrajectoryMap& map, const std::vector<Trajectory>& y) {
  double s = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) s += map.outputs[c].norm(y[c]);
  return s;
}

Trajectory initial_probe(const LinearTrajectoryMap& map, const ProbeOptions& o, int i) {
  const auto& in = map.input;
  const auto stream = static_cast<std::uint64_t>(i) << 20;
  Trajectory g = in.zeros();
  if (o.subspace.size() != 0) {
    g[0] = o.subspace * gaussian_vector(o.subspace.cols(), o.seed, stream);
  } else if (o.smooth && in.nodes() > 1) {
    // A few cosine modes in time, each with its own random spatial profile.
    const int modes = 4;
    double t_total = 0.0;
    for (double w : in.time_weights) t_total += w;
    for (int m = 0; m < modes; ++m) {
      Vector prof = gaussian_vector(in.dim(), o.seed, stream + 1 + m) / (1.0 + m);
      double t = 0.0;
      for (std::size_t k = 0; k < in.nodes(); ++k) {
        t += in.time_weights[k];
        g[k] += std::cos(std::numbers::pi * m * t / t_total) * prof;
      }
    }
  } else {
    for (std::size_t k = 0; k < in.nodes(); ++k) g[k] = gaussian_vector(in.dim(), o.seed, stream + 1 + k);
  }
  double n = in.norm(g);
  if (n > 0)
    for (auto& v : g) v /= n;
  return g;
}

Trajectory ascend_direction(const LinearTrajectoryMap& map, const ProbeOptions& o, const Trajectory& grad) {
  if (o.subspace.size() == 0) return map.input.dual_direction(grad);
  // Restricted to span(Q) with Q W-orthonormal: the dual direction is Q Qᵀ∇ normalized.
  Vector a = o.subspace.transpose() * grad[0];
  Trajectory g = map.input.zeros();
  double na = a.norm();
  if (na == 0.0) return g;
  g[0] = o.subspace * (a / na);
  return g;
}

}  // namespace

RatioEstimate maximize_ratio(const LinearTrajectoryMap& map, const ProbeOptions& o) {
  if (o.probes < 1) throw PreconditionError("maximize_ratio: at least one probe required");
  if (o.subspace.size() != 0 && map.input.nodes() != 1)
    throw PreconditionError("maximize_ratio: subspace restriction needs a single-node input");
  RatioEstimate est;
  est.method = "probe-lower-bound";
  est.probes = o.probes;
  double best = 0.0;
  for (int i = 0; i < o.probes; ++i) {
    Trajectory g = initial_probe(map, o, i);
    if (map.input.norm(g) == 0.0) {
      est.running_max.push_back(best);
      continue;
    }
    auto y = map.forward(g);
    double val = numerator(map, y);
    for (int it = 0; it < o.ascent_iterations; ++it) {
      std::vector<Trajectory> grads(y.size());
      for (std::size_t c = 0; c < y.size(); ++c) grads[c] = map.outputs[c].gradient(y[c]);
      Trajectory next = ascend_direction(map, o, map.adjoint(grads));
      if (map.input.norm(next) == 0.0) break;
      auto ny = map.forward(next);
      double nv = numerator(map, ny);
      ++est.iterations;
      if (!(nv > val)) break;
      bool done = nv - val <= o.tolerance * nv;
      g = std::move(next), y = std::move(ny), val = nv;
      if (done) break;
    }
    if (val > best) best = val, est.maximizer = g;
    est.running_max.push_back(best);
  }
  est.value = best;
  return est;
}

double gram_gain(const Matrix& gram, const Vector& weights, const Matrix& basis) {
  Matrix m;
  if (basis.size() == 0) {
    Vector s = weights.array().rsqrt();
    m = s.asDiagonal() * gram * s.asDiagonal();
  } else {
    m = basis.transpose() * gram * basis;
  }
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

RelativeBoundFit fit_relative_bound(std::span<const double> a, std::span<const double> b, std::span<const double> n) {
  if (a.size() != b.size() || a.size() != n.size() || a.empty())
    throw PreconditionError("fit_relative_bound: probe arrays must be non-empty and of equal length");
  std::vector<double> ratio;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (n[i] > 0) ratio.push_back(b[i] / n[i]);
  std::sort(ratio.begin(), ratio.end());
  double med = ratio.empty() ? 1.0 : ratio[ratio.size() / 2];

  auto feasible = [&](double m, double e) {
    if (m < 0 || e < 0 || !std::isfinite(m) || !std::isfinite(e)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > (m * b[i] + e * n[i]) * (1 + 1e-10) + 1e-300) return false;
    return true;
  };
  RelativeBoundFit best;
  best.feasible = false;
  double obj = std::numeric_limits<double>::infinity();
  auto consider = [&](double m, double e) {
    if (!feasible(m, e)) return;
    double v = m * med + e;
    if (v < obj) obj = v, best = {m, e, true};
  };

  double em = 0.0, mm = 0.0;
  bool n_ok = true, b_ok = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (n[i] > 0) em = std::max(em, a[i] / n[i]); else if (a[i] > 0) n_ok = false;
    if (b[i] > 0) mm = std::max(mm, a[i] / b[i]); else if (a[i] > 0) b_ok = false;
  }
  if (n_ok) consider(0.0, em);
  if (b_ok) consider(mm, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double det = b[i] * n[j] - b[j] * n[i];
      if (std::abs(det) < 1e-300) continue;
      consider((a[i] * n[j] - a[j] * n[i]) / det, (b[i] * a[j] - b[j] * a[i]) / det);
    }
  return best;
}

double relative_bound_residual(const RelativeBoundFit& fit, std::span<const double> a, std::span<const double> b,
                               std::span<const double> n) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] <= 0) continue;
    r = std::max(r, std::max(0.0, a[i] - fit.m * b[i] - fit.eta * n[i]) / a[i]);
  }
  return r;
}

}  // namespace evolab::opalg
