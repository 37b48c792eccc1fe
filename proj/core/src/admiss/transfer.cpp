#include "evolab/admiss/transfer.hpp"

#include "evolab/error.hpp"
#include "evolab/evofam/expm.hpp"
#include "evolab/opalg/estimate.hpp"
#include "evolab/opalg/fractional.hpp"
#include "evolab/opalg/norms.hpp"
#include "evolab/opalg/trace_norm.hpp"

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace evolab::admiss {

double duhamel_frozen_residual(const opalg::DiscreteOperator& a0, const opalg::DiscreteOperator& a1, const Vector& x,
                               const std::vector<double>& t_grid, int r_nodes) {
  if (a0.size() != a1.size() || x.size() != a0.size()) throw PreconditionError("duhamel_frozen_residual: size mismatch");
  if (r_nodes < 1) throw PreconditionError("duhamel_frozen_residual: need at least one quadrature cell");
  const Matrix delta = a0.matrix - a1.matrix;
  double worst = 0.0;
  for (double t : t_grid) {
    if (t < 0) throw PreconditionError("duhamel_frozen_residual: negative time");
    if (t == 0) continue;
    const double h = t / r_nodes;
    const Matrix e0 = evofam::expm_oracle(a0, h), e1 = evofam::expm_oracle(a1, h);
    // Trapezoid Σ w_j e^{-(t-r_j)A0} Δ e^{-r_j A1} x, Horner in powers of e^{-hA0}.
    Vector z = x, acc = 0.5 * h * (delta * z);
    for (int j = 1; j <= r_nodes; ++j) {
      z = e1 * z;
      acc = e0 * acc + (j == r_nodes ? 0.5 : 1.0) * h * (delta * z);
    }
    Vector lhs = evofam::expm_oracle(a1, t) * x;
    Vector rhs = evofam::expm_oracle(a0, t) * x + acc;
    worst = std::max(worst, a0.x_norm(lhs - rhs));
  }
  return worst;
}

double convolution_gain(const opalg::DiscreteOperator& a, const opalg::ObservationMap& c, double theta, double tau,
                        int nodes, const opalg::ProbeOptions& opts) {
  if (!(tau > 0) || nodes < 1) throw PreconditionError("convolution_gain: need tau > 0 and nodes >= 1");
  if (c.matrix.cols() != a.size()) throw PreconditionError("convolution_gain: C and A differ in dimension");
  const double h = tau / nodes;
  auto e = std::make_shared<const Matrix>(evofam::expm_oracle(a, h));
  auto cm = std::make_shared<const Matrix>(c.matrix);
  opalg::LinearTrajectoryMap map;
  map.input.time_weights.assign(nodes, h);
  map.input.space_weights = a.norms->weights;
  map.input.p = theta;
  opalg::BochnerSpace out;
  out.time_weights.assign(nodes, h);
  out.space_weights = c.y_weights;
  out.p = theta;
  map.outputs = {out};
  // z_k = e^{-hA} z_{k-1} + h g_k, y_k = C z_k: right-endpoint rule for the convolution.
  map.forward = [e, cm, h](const Trajectory& g) {
    Trajectory y;
    Vector z = Vector::Zero(e->rows());
    for (const auto& gk : g) {
      z = *e * z + h * gk;
      y.push_back(*cm * z);
    }
    return std::vector<Trajectory>{y};
  };
  map.adjoint = [e, cm, h](const std::vector<Trajectory>& ybar) {
    const auto& yb = ybar[0];
    Trajectory g(yb.size());
    Vector lam = Vector::Zero(e->rows());
    for (std::size_t k = yb.size(); k-- > 0;) {
      lam = cm->transpose() * yb[k] + e->transpose() * lam;
      g[k] = h * lam;
    }
    return g;
  };
  opalg::ProbeOptions o = opts;
  o.smooth = true;
  o.subspace = Matrix();
  auto est = opalg::maximize_ratio(map, o);
  return std::pow(est.value, theta);
}

double semigroup_lp_bound(const opalg::DiscreteOperator& a, double theta, double tau) {
  if (!(tau > 0) || !(theta >= 1)) throw PreconditionError("semigroup_lp_bound: need tau > 0 and theta >= 1");
  using gl = boost::math::quadrature::gauss<double, 8>;
  const Vector& w = a.norms->weights;
  double total = 0.0;
  auto panel = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < gl::abscissa().size(); ++i)
      for (double sgn : {-1.0, 1.0}) {
        double r = mid + sgn * half * gl::abscissa()[i];
        total += half * gl::weights()[i] * std::pow(opalg::x_operator_norm(evofam::expm_oracle(a, r), w, w), theta);
      }
  };
  for (int m = 0; m < 12; ++m) panel(std::ldexp(tau, -m - 1), std::ldexp(tau, -m));
  panel(0.0, std::ldexp(tau, -12));
  return std::pow(total, 1.0 / theta);
}

namespace {

struct FitData {
  std::vector<double> a, b, n;
  void add(double ai, double bi, double ni) {
    a.push_back(ai), b.push_back(bi), n.push_back(ni);
  }
};

// Right singular vectors of Δ in weighted coordinates, mapped back to X.
std::vector<Vector> top_singular_inputs(const Matrix& delta, const Vector& w_in, const Vector& w_out, int count) {
  Vector si = w_in.array().sqrt(), so = w_out.array().sqrt();
  Matrix m = so.asDiagonal() * delta * si.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
  std::vector<Vector> out;
  for (int k = 0; k < std::min<Index>(count, svd.matrixV().cols()); ++k)
    out.push_back(si.cwiseInverse().asDiagonal() * svd.matrixV().col(k));
  return out;
}

}  // namespace

TrBetaReport tr_beta_transfer(const opalg::DiscreteOperator& a0, const opalg::DiscreteOperator& a1,
                              const opalg::ObservationMap& c, double theta, double beta, double tau,
                              const opalg::ProbeOptions& opts) {
  if (!(beta > 1.0)) throw PreconditionError("tr_beta_transfer: beta must exceed 1");
  if (!(theta > 1.0) || theta >= beta / (beta - 1.0)) {
    std::ostringstream msg;
    msg << "tr_beta_transfer: theta = " << theta << " outside (1, beta/(beta-1)) = (1, " << beta / (beta - 1.0) << ")";
    throw PreconditionError(msg.str());
  }
  if (a0.size() != a1.size()) throw PreconditionError("tr_beta_transfer: A0 and A1 differ in dimension");
  TrBetaReport r;
  r.theta = theta, r.beta = beta, r.tau = tau;
  const Vector& w = a0.norms->weights;
  const Index n = a0.size();
  const Matrix delta = a1.matrix - a0.matrix;

  // Fit ‖Δx‖ ≤ M‖x‖_{Tr_β} + η‖x‖ on modes of A0, singular vectors of Δ and random vectors.
  std::vector<Vector> train;
  Matrix modes = opalg::low_mode_basis(a0.matrix, w, n);
  for (Index k = 0; k < modes.cols(); ++k) train.push_back(modes.col(k));
  for (auto& v : top_singular_inputs(delta, w, w, 4)) train.push_back(v);
  for (int i = 0; i < 32; ++i) train.push_back(opalg::gaussian_vector(n, opts.seed, 1000 + i));
  FitData fit, val;
  for (const auto& x : train) fit.add(a0.x_norm(delta * x), opalg::trace_norm(a0, x, beta), a0.x_norm(x));
  for (int i = 0; i < 32; ++i) {
    Vector x = opalg::gaussian_vector(n, opts.seed, 5000 + i);
    val.add(a0.x_norm(delta * x), opalg::trace_norm(a0, x, beta), a0.x_norm(x));
  }
  auto f = opalg::fit_relative_bound(fit.a, fit.b, fit.n);
  r.m = f.m, r.eta = f.eta;
  r.fit_residual = opalg::relative_bound_residual(f, val.a, val.b, val.n);

  r.gamma_a0 = gamma_semigroup(a0, c, theta, tau, opts).gamma_hat;
  r.gamma_a1 = gamma_semigroup(a1, c, theta, tau, opts).gamma_hat;
  opalg::ProbeOptions ko = opts;
  ko.probes = std::min(opts.probes, 8);
  r.k_tau = convolution_gain(a0, c, theta, tau, 256, ko);
  r.c_tau = semigroup_lp_bound(a1, theta, tau);

  // K = sup_r r^{(β−1)/β} ‖e^{-rA1}‖_{X→Tr_β}; exact upper bound ‖E‖ + ‖(A0/2)^{1/2}E‖ when β = 2
  // and A0 is self-adjoint, probe lower bound otherwise.
  const double ex = (beta - 1.0) / beta;
  const bool closed = beta == 2.0 && a0.self_adjoint();
  Matrix half_root;
  if (closed) half_root = opalg::fractional_power(a0, 0.5).matrix / std::sqrt(2.0);
  for (int j = 0; j <= 48; ++j) {
    double rr = tau * std::pow(1e-8, j / 48.0);
    Matrix e = evofam::expm_oracle(a1, rr);
    double op_norm = 0.0;
    if (closed) {
      op_norm = opalg::x_operator_norm(e, w, w) + opalg::x_operator_norm(half_root * e, w, w);
    } else {
      for (Index k = 0; k < modes.cols(); ++k)
        op_norm = std::max(op_norm, opalg::trace_norm(a0, e * modes.col(k), beta) / a0.x_norm(modes.col(k)));
    }
    r.k_trace = std::max(r.k_trace, std::pow(rr, ex) * op_norm);
  }
  const double e_r = theta * ex;
  r.r_integral = std::pow(tau, 1.0 - e_r) / (1.0 - e_r);
  double inner = r.k_tau * (std::pow(2.0 * r.m * r.k_trace, theta) * r.r_integral + std::pow(2.0 * r.eta * r.c_tau, theta));
  r.majorant = r.gamma_a0 + std::pow(inner, 1.0 / theta);
  r.finite = std::isfinite(r.gamma_a0) && std::isfinite(r.gamma_a1) && std::isfinite(r.majorant) &&
             std::isfinite(r.m) && std::isfinite(r.eta);
  r.holds = r.finite && r.gamma_a1 <= 1.1 * r.majorant;
  return r;
}

BRelativeReport b_relative_transfer(const opalg::OperatorFamily& a, const opalg::ObservationMap& b,
                                    const opalg::ObservationMap& c, double theta, const opalg::ProbeOptions& opts) {
  if (!(theta > 1.0)) throw PreconditionError("b_relative_transfer: theta must exceed 1");
  const double tau = a.tau();
  const Index n = a.size();
  const Vector& w = a.norms().weights;
  if (b.matrix.cols() != n || c.matrix.cols() != n) throw PreconditionError("b_relative_transfer: dimension mismatch");
  BRelativeReport r;
  r.theta = theta;

  constexpr int kTimes = 9;
  std::vector<double> times;
  for (int m = 0; m < kTimes; ++m) times.push_back(tau * m / (kTimes - 1));
  std::vector<Matrix> mats;
  for (double t : times) mats.push_back(a.at(t));

  std::vector<Vector> probes;
  Matrix modes = opalg::low_mode_basis(mats.front(), w, n);
  for (Index k = 0; k < modes.cols(); ++k) probes.push_back(modes.col(k));
  for (int i = 0; i < 32; ++i) probes.push_back(opalg::gaussian_vector(n, opts.seed, 2000 + i));

  FitData fit, val;
  for (int i = 0; i < kTimes; ++i)
    for (int j = i + 1; j < kTimes; ++j) {
      Matrix delta = mats[j] - mats[i];
      std::vector<Vector> xs = probes;
      for (auto& v : top_singular_inputs(delta, w, w, 2)) xs.push_back(v);
      double slope = 0.0;
      for (const auto& x : xs) {
        double ai = weighted_norm(delta * x, w), bi = b.y_norm(b.matrix * x), ni = weighted_norm(x, w);
        fit.add(ai, bi, ni);
        if (bi > 0) slope = std::max(slope, ai / bi);
        else if (ai > 1e-12 * ni) slope = std::numeric_limits<double>::infinity();
      }
      r.pair_lags.push_back(times[j] - times[i]);
      r.pair_slopes.push_back(slope);
      for (int v = 0; v < 4; ++v) {
        Vector x = opalg::gaussian_vector(n, opts.seed, 7000 + 64 * i + 8 * j + v);
        val.add(weighted_norm(delta * x, w), b.y_norm(b.matrix * x), weighted_norm(x, w));
      }
    }
  auto f = opalg::fit_relative_bound(fit.a, fit.b, fit.n);
  r.m = f.m, r.eta = f.eta;
  r.fit_residual = f.feasible ? opalg::relative_bound_residual(f, val.a, val.b, val.n)
                              : std::numeric_limits<double>::infinity();
  r.satisfied = f.feasible && std::isfinite(r.m) && std::isfinite(r.eta) && r.fit_residual <= r.tolerance;

  for (int m = 0; m < kTimes; m += 2)
    r.gamma_b = std::max(r.gamma_b, gamma_semigroup(a.operator_at(times[m]), b, theta, tau, opts).gamma_hat);
  const auto a0 = a.operator_at(0.0), a1 = a.operator_at(tau);
  r.gamma_c0 = gamma_semigroup(a0, c, theta, tau, opts).gamma_hat;
  r.gamma_c1 = gamma_semigroup(a1, c, theta, tau, opts).gamma_hat;
  if (r.satisfied) {
    opalg::ProbeOptions ko = opts;
    ko.probes = std::min(opts.probes, 8);
    r.k_tau = convolution_gain(a0, c, theta, tau, 256, ko);
    r.c_tau = semigroup_lp_bound(a1, theta, tau);
    r.bound = r.gamma_c0 + std::pow(r.k_tau, 1.0 / theta) * (r.m * r.gamma_b + r.eta * r.c_tau);
    r.holds = r.gamma_c1 <= 1.1 * r.bound;
  }
  return r;
}

}  // namespace evolab::admiss
