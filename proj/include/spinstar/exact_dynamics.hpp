#pragma once

#include <vector>

#include "spinstar/integrators.hpp"
#include "spinstar/model.hpp"

namespace spinstar {

/// Recurrence time of the resonant model: 2 pi / A for integer total spin
/// j1 + N/2, 4 pi / A otherwise.
double period(const ModelSpec& spec);

/// Reduced central-spin dynamics from the Clebsch-Gordan sum.
///
/// All coefficients are gathered once into a sparse spectrum per matrix
/// element; every frequency is an integer multiple of A/2, so evaluation at
/// a time t is a finite phase sum. Bath sectors whose thermal weight is
/// below weight_floor are skipped and their total is reported.
class ExactPropagator {
 public:
  ExactPropagator(const ModelSpec& spec, const DensityMatrix& rho0, double weight_floor = 1e-16);

  ComplexMatrix at(double t) const;
  cplx element(std::size_t row, std::size_t col, double t) const;

  /// Thermal weight left out by the floor.
  double dropped_weight() const { return dropped_; }
  /// Number of stored (frequency, amplitude) pairs over all elements.
  std::size_t spectrum_size() const;

 private:
  struct Line {
    int n;  // frequency n A / 2
    cplx amp;
  };
  ModelSpec spec_;
  std::size_t dim_;
  std::vector<std::vector<Line>> lines_;  // row-major element index
  double dropped_ = 0.0;
};

/// <m| rho_S(t) |mt>; requires omega0 = 0.
cplx exact_element(const ModelSpec& spec, const DensityMatrix& rho0, HalfInt m, HalfInt mt, double t);

TimeSeries exact_evolve(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid);

}  // namespace spinstar
