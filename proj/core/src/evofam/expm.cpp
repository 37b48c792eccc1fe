#include "evolab/evofam/expm.hpp"

#include "evolab/error.hpp"

#include <array>
#include <cmath>

namespace evolab::evofam {

namespace {

constexpr std::array<double, 4> kB3{120., 60., 12., 1.};
constexpr std::array<double, 6> kB5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
constexpr std::array<double, 10> kB9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                     2162160.,     110880.,      3960.,        90.,        1.};
constexpr std::array<double, 14> kB13{64764752532480000., 32382376266240000., 7771770303897600.,
                                      1187353796428800.,  129060195264000.,   10559470521600.,
                                      670442572800.,      33522128640.,       1323241920.,
                                      40840800.,          960960.,            16380.,
                                      182.,               1.};

// θ_m: largest ‖A‖_1 for which the degree-m approximant is accurate to unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

template <std::size_t N>
Matrix pade_low(const Matrix& a, const std::array<double, N>& b) {
  const Index n = a.rows();
  Matrix id = Matrix::Identity(n, n);
  Matrix a2 = a * a;
  Matrix pw = id;  // A^{2k}
  Matrix u = Matrix::Zero(n, n), v = Matrix::Zero(n, n);
  for (std::size_t k = 0; 2 * k < N; ++k) {
    v += b[2 * k] * pw;
    if (2 * k + 1 < N) u += b[2 * k + 1] * pw;
    pw = pw * a2;
  }
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

Matrix pade13(const Matrix& a) {
  const Index n = a.rows();
  const auto& b = kB13;
  Matrix id = Matrix::Identity(n, n);
  Matrix a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
  Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw PreconditionError("expm: matrix must be square");
  if (!m.allFinite()) throw NumericalError("expm: non-finite input");
  if (m.size() == 0) return m;
  const double nrm = norm1(m);
  Matrix r;
  if (nrm <= kTheta3) {
    r = pade_low(m, kB3);
  } else if (nrm <= kTheta5) {
    r = pade_low(m, kB5);
  } else if (nrm <= kTheta7) {
    r = pade_low(m, kB7);
  } else if (nrm <= kTheta9) {
    r = pade_low(m, kB9);
  } else {
    int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    r = pade13(m * std::ldexp(1.0, -s));
    for (int k = 0; k < s; ++k) r = r * r;
  }
  if (!r.allFinite()) throw NumericalError("expm: non-finite result");
  return r;
}

Matrix expm_oracle(const opalg::DiscreteOperator& op, double t) {
  if (!(t >= 0)) throw PreconditionError("expm_oracle: t must be non-negative");
  if (t == 0.0) return Matrix::Identity(op.size(), op.size());
  return expm(-t * op.matrix);
}

}  // namespace evolab::evofam
