#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spinstar/half_int.hpp"

namespace spinstar {

/// Table of ln(n!) for n = 0 .. size-1.
///
/// Immutable after construction, so one instance may be shared freely
/// between threads.
class LogFactorialTable {
 public:
  explicit LogFactorialTable(std::size_t size = 4096);

  /// ln(n!); throws std::out_of_range outside the table.
  double operator()(long n) const;
  std::size_t size() const { return table_.size(); }
  std::span<const double> values() const { return table_; }

 private:
  std::vector<double> table_;
};

/// Process-wide table, built on first use.
const LogFactorialTable& log_factorials();

/// ln C(n, k); -infinity when k < 0 or k > n.
double log_binomial(long n, long k);

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.
///
/// Selection-rule violations (M != m1 + m2, broken triangle, |m| > j)
/// give exactly 0. Negative magnitudes or a projection whose parity does
/// not match its magnitude throw std::invalid_argument.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

/// Smallest bath spin for N spins-1/2: 0 for even N, 1/2 for odd N.
HalfInt min_bath_spin(int N);

/// All collective bath spins j = min_bath_spin(N), ..., N/2.
std::vector<HalfInt> bath_spins(int N);

/// Multiplicity N_j = C(N, N/2+j) - C(N, N/2+j+1) of collective spin j.
double log_degeneracy(int N, HalfInt j);
double degeneracy(int N, HalfInt j);

/// Z = tr exp(-beta J_z) = (2 cosh(beta/2))^N for spins with eigenvalues +-1/2.
double log_partition_function(int N, double beta);
double partition_function(int N, double beta);

/// ln of the thermal weight N_j exp(-beta m) / Z carried by one (j, m) sector.
double log_sector_weight(int N, HalfInt j, HalfInt m, double beta);

}  // namespace spinstar
