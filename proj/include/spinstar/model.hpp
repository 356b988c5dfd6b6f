#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spinstar/complex_matrix.hpp"
#include "spinstar/half_int.hpp"

namespace spinstar {

/// Central spin j1 coupled with strength A to N bath spins-1/2 at inverse
/// temperature beta; omega0 is the central-spin detuning.
struct ModelSpec {
  HalfInt j1 = kHalf;
  int N = 1;
  double beta = 0.0;
  double A = 1.0;
  double omega0 = 0.0;

  /// Throws ConfigError on N < 1, A <= 0, negative or zero j1, non-finite numbers.
  void validate() const;
  int dim() const { return j1.twice() + 1; }
  std::string describe() const;
};

/// Row/column index of projection m; rows run m = j1, j1-1, ..., -j1.
std::size_t index_of(HalfInt j1, HalfInt m);
HalfInt projection_at(HalfInt j1, std::size_t index);

/// Spin-j matrices in the |j m> basis ordered as above.
ComplexMatrix spin_z(HalfInt j);
ComplexMatrix spin_plus(HalfInt j);
ComplexMatrix spin_minus(HalfInt j);

/// Central-spin density matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(HalfInt j1, ComplexMatrix m);

  /// |j1 m><j1 m|
  static DensityMatrix basis_state(HalfInt j1, HalfInt m);
  /// |psi><psi| for a normalized copy of psi.
  static DensityMatrix pure(HalfInt j1, const std::vector<cplx>& psi);
  /// Random full-rank state: G G^dagger / tr with complex Gaussian G.
  static DensityMatrix random(HalfInt j1, std::uint64_t seed);

  HalfInt j1() const { return j1_; }
  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(HalfInt m, HalfInt mt) const { return m_(index_of(j1_, m), index_of(j1_, mt)); }

  double min_eigenvalue() const;
  /// Throws ConfigError unless Hermitian and unit trace within tol and
  /// positive within 1e-10.
  void validate(double tol = 1e-12) const;

 private:
  HalfInt j1_;
  ComplexMatrix m_;
};

/// Uniform-grid samples of the central-spin state produced by one method.
struct TimeSeries {
  std::string method;
  ModelSpec model;
  std::map<std::string, std::string> meta;
  std::vector<double> times;
  std::vector<ComplexMatrix> values;

  /// Trace, Hermiticity and positivity defects over all samples.
  double max_trace_defect() const;
  double max_hermiticity_defect() const;
  double min_eigenvalue() const;

  std::vector<double> real_part(std::size_t row, std::size_t col) const;
};

}  // namespace spinstar
