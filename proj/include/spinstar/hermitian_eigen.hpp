#pragma once

#include <vector>

#include "spinstar/complex_matrix.hpp"

namespace spinstar {

struct JacobiOptions {
  int max_sweeps = 100;
  /// Stop once the off-diagonal Frobenius norm falls below tolerance * ||M||_F.
  double tolerance = 1e-15;
};

struct HermitianEigen {
  std::vector<double> values;  ///< ascending
  ComplexMatrix vectors;       ///< column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// The input is symmetrized as (M + M^dagger)/2 first. Throws
/// NumericalError if the rotations have not converged after max_sweeps.
HermitianEigen hermitian_eigen(const ComplexMatrix& m, const JacobiOptions& options = {});

}  // namespace spinstar
