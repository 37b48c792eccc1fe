#pragma once

#include "evolab/opalg/family.hpp"

#include <vector>

namespace evolab::opalg {

/// Smallest ω with ‖Δx‖ ≤ ω‖x‖_D + η‖x‖ for all x, given η.
double relative_modulus(const Matrix& delta, const NormSpec& norms, double eta);

/// Estimates the relative ν-Dini modulus of `family` on the lags `lags` (increasing, > 0).
/// For every start node t (at most 24, evenly spread) the pair (t, s) with the widest
/// separation s − t ≤ δ is measured; ω̂ is the running max over lags, so non-decreasing.
/// With `fit_eta`, η̂ is the smallest offset for which ω̂ extrapolates linearly to 0 at lag 0;
/// otherwise η̂ = 0. Throws PreconditionError for single-sample families.
DiniModulus dini_modulus(const OperatorFamily& family, double nu, const std::vector<double>& lags,
                         bool fit_eta = false);

/// Smallest sample spacing doubled repeatedly, closed off with τ.
std::vector<double> default_lags(const OperatorFamily& family);

}  // namespace evolab::opalg
