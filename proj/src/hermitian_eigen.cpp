#include "spinstar/hermitian_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spinstar/errors.hpp"

namespace spinstar {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = r + 1; c < a.cols(); ++c) s += 2.0 * std::norm(a(r, c));
  return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p,q). W acts on columns p, q:
//   W_pp = c, W_pq = s, W_qp = -s e^{-i phi}, W_qq = c e^{-i phi}.
void rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const cplx apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const cplx phase = std::conj(apq) / r;  // e^{-i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * r);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const cplx wpp = c, wpq = s, wqp = -s * phase, wqq = c * phase;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {  // A <- A W
    const cplx akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * wpp + akq * wqp;
    a(k, q) = akp * wpq + akq * wqq;
  }
  for (std::size_t k = 0; k < n; ++k) {  // A <- W^dagger A
    const cplx apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(wpp) * apk + std::conj(wqp) * aqk;
    a(q, k) = std::conj(wpq) * apk + std::conj(wqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * r;
  a(q, q) = aqq + t * r;
  for (std::size_t k = 0; k < n; ++k) {  // V <- V W
    const cplx vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * wpp + vkq * wqp;
    v(k, q) = vkp * wpq + vkq * wqq;
  }
}

}  // namespace

HermitianEigen hermitian_eigen(const ComplexMatrix& m, const JacobiOptions& options) {
  if (!m.square()) throw std::invalid_argument("hermitian_eigen: matrix is not square");
  if (!m.all_finite()) throw NumericalError("hermitian_eigen: non-finite input");
  const std::size_t n = m.rows();

  ComplexMatrix a(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = a.frobenius_norm();
  const double target = options.tolerance * scale;
  int sweep = 0;
  while (scale > 0.0 && off_diagonal_norm(a) > target) {
    if (sweep >= options.max_sweeps) {
      throw NumericalError("hermitian_eigen: no convergence after " + std::to_string(sweep) + " sweeps (dim " +
                           std::to_string(n) + ")");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r == 0.0) continue;
        // Negligible against both diagonal entries: drop it outright.
        const double dp = std::abs(a(p, p).real()), dq = std::abs(a(q, q).real());
        if (sweep > 4 && dp + 1e3 * r == dp && dq + 1e3 * r == dq) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  HermitianEigen out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n);
  out.sweeps = sweep;
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace spinstar
