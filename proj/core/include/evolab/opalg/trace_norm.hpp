#pragma once

#include "evolab/opalg/operator.hpp"

namespace evolab::opalg {

/// Moment-integral norm on the trace space Tr_p:
///   ‖x‖ + (∫_0^∞ ‖A e^{-tA} x‖^p dt)^{1/p}.
/// The p = 2 self-adjoint case is evaluated in closed form per mode; everything else
/// by Gauss–Kronrod quadrature on geometric panels. Throws NumericalError when the
/// spectrum is not in the open right half-plane.
double trace_norm(const DiscreteOperator& op, const Vector& x, double p);

/// Same norm, always by quadrature (used to cross-check the closed form).
double trace_norm_quadrature(const DiscreteOperator& op, const Vector& x, double p);

/// c(A) = max(1, (p λ_min)^{-1/p}): trace_norm(x) ≤ c(A) (‖x‖ + ‖Ax‖) for self-adjoint positive A.
double trace_norm_upper_constant(const DiscreteOperator& op, double p);

}  // namespace evolab::opalg
