#pragma once

#include "evolab/linalg.hpp"
#include "evolab/opalg/operator.hpp"

namespace evolab::evofam {

/// e^M by scaling and squaring with the degree-13 Padé approximant (Higham 2005).
/// Throws NumericalError on non-finite input or output.
Matrix expm(const Matrix& m);

/// e^{-t A}: the autonomous semigroup generated by −A. Throws PreconditionError for t < 0.
Matrix expm_oracle(const opalg::DiscreteOperator& op, double t);

}  // namespace evolab::evofam
