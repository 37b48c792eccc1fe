#include "evolab/opalg/dini.hpp"

#include "evolab/error.hpp"
#include "evolab/opalg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace evolab::opalg {

double relative_modulus(const Matrix& delta, const NormSpec& norms, double eta) {
  if (eta < 0) throw PreconditionError("relative_modulus: eta must be non-negative");
  const auto& w = norms.weights;
  double w0 = dx_operator_norm(delta, norms);
  if (eta == 0.0 || w0 == 0.0) return w0;
  // ‖Δx‖ ≤ (ω+η)‖x‖ + ω‖Rx‖  <=>  relative norm with (a, b) = (ω+η, ω) at most 1.
  auto feasible = [&](double om) {
    return relative_operator_norm(delta, w, w, om + eta, om, norms.d_reference) <= 1.0;
  };
  if (feasible(0.0)) return 0.0;
  double lo = 0.0, hi = w0;
  for (int it = 0; it < 48 && hi - lo > 1e-12 * w0; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace {

struct PairTable {
  const OperatorFamily& family;
  std::map<std::pair<std::size_t, std::size_t>, double> cache;
  double eta = 0.0;

  double operator()(std::size_t i, std::size_t j) {
    auto key = std::make_pair(i, j);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    Matrix d = family.sample(j).matrix - family.sample(i).matrix;
    double v = relative_modulus(d, family.norms(), eta);
    cache.emplace(key, v);
    return v;
  }
};

std::vector<std::size_t> start_nodes(std::size_t k) {
  const std::size_t cap = 24;
  std::vector<std::size_t> out;
  if (k <= cap) {
    for (std::size_t i = 0; i < k; ++i) out.push_back(i);
  } else {
    for (std::size_t m = 0; m < cap; ++m) out.push_back(m * (k - 1) / (cap - 1));
  }
  return out;
}

std::vector<double> omega_profile(PairTable& table, const std::vector<double>& tg, const std::vector<double>& lags,
                                  std::size_t nlags) {
  std::vector<double> om;
  double run = 0.0;
  auto starts = start_nodes(tg.size());
  for (std::size_t m = 0; m < nlags; ++m) {
    for (auto i : starts) {
      auto it = std::upper_bound(tg.begin(), tg.end(), tg[i] + lags[m] * (1 + 1e-12));
      std::size_t j = static_cast<std::size_t>(it - tg.begin()) - 1;
      if (j > i) run = std::max(run, table(i, j));
    }
    om.push_back(run);
  }
  return om;
}

double extrapolate_to_zero(const std::vector<double>& lags, const std::vector<double>& om) {
  if (om.size() < 2) return om.empty() ? 0.0 : om[0];
  double slope = (om[1] - om[0]) / (lags[1] - lags[0]);
  return om[0] - slope * lags[0];
}

}  // namespace

std::vector<double> default_lags(const OperatorFamily& family) {
  const auto& tg = family.time_grid();
  if (tg.size() < 2) throw PreconditionError("dini_modulus: family needs at least 2 time samples");
  double h = tg[1] - tg[0];
  for (std::size_t k = 2; k < tg.size(); ++k) h = std::min(h, tg[k] - tg[k - 1]);
  std::vector<double> lags;
  for (double d = h; d < family.tau() * (1 - 1e-12); d *= 2) lags.push_back(d);
  lags.push_back(family.tau());
  return lags;
}

DiniModulus dini_modulus(const OperatorFamily& family, double nu, const std::vector<double>& lags, bool fit_eta) {
  const auto& tg = family.time_grid();
  if (tg.size() < 2) throw PreconditionError("dini_modulus: family needs at least 2 time samples");
  if (!(nu >= 1.0)) throw PreconditionError("dini_modulus: nu must be at least 1");
  if (lags.empty()) throw PreconditionError("dini_modulus: empty lag set");
  for (std::size_t m = 0; m < lags.size(); ++m)
    if (!(lags[m] > 0) || (m > 0 && !(lags[m] > lags[m - 1])))
      throw PreconditionError("dini_modulus: lags must be positive and increasing");

  DiniModulus d;
  d.nu = nu;
  d.deltas = lags;

  PairTable table{family, {}, 0.0};
  d.omega_hat = omega_profile(table, tg, lags, lags.size());
  double top = *std::max_element(d.omega_hat.begin(), d.omega_hat.end());

  if (fit_eta && lags.size() >= 2 && top > 0) {
    double tol = 1e-8 * top;
    if (extrapolate_to_zero(lags, d.omega_hat) > tol) {
      // Upper end: η = max ‖Δ‖_X makes ω ≡ 0 feasible on every measured pair.
      double hi = 0.0;
      for (auto i : start_nodes(tg.size()))
        for (std::size_t j = i + 1; j < tg.size(); ++j) {
          const auto& w = family.norms().weights;
          hi = std::max(hi, x_operator_norm(family.sample(j).matrix - family.sample(i).matrix, w, w));
        }
      double lo = 0.0;
      for (int it = 0; it < 40 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        PairTable t{family, {}, mid};
        auto om = omega_profile(t, tg, lags, 2);
        (extrapolate_to_zero(lags, om) <= tol ? hi : lo) = mid;
      }
      d.eta_hat = hi;
      PairTable t{family, {}, hi};
      d.omega_hat = omega_profile(t, tg, lags, lags.size());
    }
  }

  // Midpoint rule on the lag cells; ω is interpolated linearly at the cell midpoint.
  double integral = 0.0;
  for (std::size_t m = 0; m + 1 < lags.size(); ++m) {
    double mid = 0.5 * (lags[m] + lags[m + 1]);
    double om = 0.5 * (d.omega_hat[m] + d.omega_hat[m + 1]);
    integral += std::pow(om / mid, nu) * (lags[m + 1] - lags[m]);
  }
  d.dini_integral = integral;

  if (lags.size() >= 2 && d.omega_hat[0] > 0 && d.omega_hat[1] > 0) {
    double i0 = std::pow(d.omega_hat[0] / lags[0], nu);
    double i1 = std::pow(d.omega_hat[1] / lags[1], nu);
    d.tail_exponent = -std::log(i1 / i0) / std::log(lags[1] / lags[0]);
  }
  d.divergent = d.tail_exponent >= 1.0;
  return d;
}

}  // namespace evolab::opalg
