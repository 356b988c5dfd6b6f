#include "spinstar/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "spinstar/errors.hpp"
#include "spinstar/hermitian_eigen.hpp"

namespace spinstar {

void ModelSpec::validate() const {
  if (j1.twice() <= 0) throw ConfigError("central spin j1 must be positive");
  if (N < 1) throw ConfigError("bath size N must be at least 1");
  if (!(A > 0.0) || !std::isfinite(A)) throw ConfigError("coupling A must be positive");
  if (!std::isfinite(beta)) throw ConfigError("beta must be finite");
  if (!std::isfinite(omega0)) throw ConfigError("omega0 must be finite");
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "j1=" << j1.str() << " N=" << N << " beta=" << beta << " A=" << A << " omega0=" << omega0;
  return os.str();
}

std::size_t index_of(HalfInt j1, HalfInt m) {
  if (!is_projection_of(j1, m)) throw std::out_of_range("projection " + m.str() + " outside spin " + j1.str());
  return static_cast<std::size_t>(integer_gap(j1, m));
}

HalfInt projection_at(HalfInt j1, std::size_t index) { return j1 - HalfInt(static_cast<int>(index)); }

ComplexMatrix spin_z(HalfInt j) {
  const std::size_t n = static_cast<std::size_t>(j.twice() + 1);
  ComplexMatrix z(n);
  for (std::size_t i = 0; i < n; ++i) z(i, i) = projection_at(j, i).value();
  return z;
}

ComplexMatrix spin_plus(HalfInt j) {
  const std::size_t n = static_cast<std::size_t>(j.twice() + 1);
  ComplexMatrix p(n);
  const double jj = j.value() * (j.value() + 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double m = projection_at(j, i).value();
    p(i - 1, i) = std::sqrt(jj - m * (m + 1.0));
  }
  return p;
}

ComplexMatrix spin_minus(HalfInt j) { return spin_plus(j).adjoint(); }

DensityMatrix::DensityMatrix(HalfInt j1, ComplexMatrix m) : j1_(j1), m_(std::move(m)) {
  const std::size_t n = static_cast<std::size_t>(j1.twice() + 1);
  if (j1.twice() <= 0 || m_.rows() != n || m_.cols() != n)
    throw ConfigError("density matrix must be square with dimension 2*j1+1");
}

DensityMatrix DensityMatrix::basis_state(HalfInt j1, HalfInt m) {
  ComplexMatrix r(static_cast<std::size_t>(j1.twice() + 1));
  const std::size_t i = index_of(j1, m);
  r(i, i) = 1.0;
  return {j1, std::move(r)};
}

DensityMatrix DensityMatrix::pure(HalfInt j1, const std::vector<cplx>& psi) {
  const std::size_t n = static_cast<std::size_t>(j1.twice() + 1);
  if (psi.size() != n) throw ConfigError("state vector length must be 2*j1+1");
  double norm = 0.0;
  for (const cplx& v : psi) norm += std::norm(v);
  if (!(norm > 0.0)) throw ConfigError("state vector must be nonzero");
  ComplexMatrix r(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) r(a, b) = psi[a] * std::conj(psi[b]) / norm;
  return {j1, std::move(r)};
}

DensityMatrix DensityMatrix::random(HalfInt j1, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(j1.twice() + 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix G(n);
  for (cplx& v : G.data()) v = {g(rng), g(rng)};
  ComplexMatrix r = G * G.adjoint();
  r *= 1.0 / r.trace().real();
  for (std::size_t a = 0; a < n; ++a) {
    r(a, a) = r(a, a).real();
    for (std::size_t b = a + 1; b < n; ++b) r(b, a) = std::conj(r(a, b));
  }
  return {j1, std::move(r)};
}

double DensityMatrix::min_eigenvalue() const { return hermitian_eigen(m_).values.front(); }

void DensityMatrix::validate(double tol) const {
  if (!m_.all_finite()) throw ConfigError("density matrix has non-finite entries");
  if (m_.hermiticity_defect() > tol) throw ConfigError("density matrix is not Hermitian");
  if (std::abs(m_.trace() - 1.0) > tol) throw ConfigError("density matrix trace differs from 1");
  if (min_eigenvalue() < -1e-10) throw ConfigError("density matrix is not positive semidefinite");
}

double TimeSeries::max_trace_defect() const {
  double d = 0.0;
  for (const ComplexMatrix& m : values) d = std::max(d, std::abs(m.trace() - 1.0));
  return d;
}

double TimeSeries::max_hermiticity_defect() const {
  double d = 0.0;
  for (const ComplexMatrix& m : values) d = std::max(d, m.hermiticity_defect());
  return d;
}

double TimeSeries::min_eigenvalue() const {
  double e = 1.0;
  for (const ComplexMatrix& m : values) e = std::min(e, hermitian_eigen(m).values.front());
  return e;
}

std::vector<double> TimeSeries::real_part(std::size_t row, std::size_t col) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const ComplexMatrix& m : values) out.push_back(m(row, col).real());
  return out;
}

}  // namespace spinstar
