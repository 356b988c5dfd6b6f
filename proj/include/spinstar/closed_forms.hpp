#pragma once

#include "spinstar/master_equations.hpp"
#include "spinstar/model.hpp"

namespace spinstar {

/// One population block of a spin-1 central spin under the correlated
/// projector: x = rho11 of sector (j, m-1), y = rho22 of (j, m),
/// z = rho33 of (j, m+1). Their sum Cblock is conserved.
struct J1BlockParams {
  HalfInt j;
  HalfInt m;
  double A = 1.0;
  double Cblock = 1.0;

  void validate() const;
  /// sqrt((j-m)(j-m+1)(j+m)(j+m+1))
  double J() const;
  /// 2 j (j+1) - m^2 + 1
  double K() const;
};

struct BlockPopulations {
  double x, y, z;
};

/// NZ solution of the block for arbitrary initial populations summing to
/// Cblock, by partial fractions of the Laplace transform. The oscillation
/// frequencies are A sqrt(K -+ J).
BlockPopulations nz2_block(const J1BlockParams& p, double x0, double y0, double z0, double t);

/// rho11 of sector (j, m-1) for the block started as (Cblock, 0, 0), the
/// case produced by rho_S(0) = |1,1><1,1|.
double nz2_population(const J1BlockParams& p, double t);

/// Large-m approximation to the TCL block with equal rates
/// A^2 (j^2 - m^2) and frequency A m; returns (rho11, rho33) for the block
/// started as (x0, Cblock - x0 - z0, z0). Throws ConfigError for m = 0.
std::pair<double, double> tcl_j1_largem(const J1BlockParams& p, double x0, double z0, double t);
std::pair<double, double> tcl_j1_largem(const J1BlockParams& p, double t);

/// Exact reduced state of a spin-1/2 with detuning omega0 at beta = 0,
/// summed over the two-level blocks {|up, m>, |down, m+1>} of every
/// bath sector.
ComplexMatrix appendix_exact(const ModelSpec& spec, const DensityMatrix& rho0, double t);

/// TCL solutions for spin 1/2 at beta = 0 in the original picture.
ComplexMatrix appendix_tcl(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, double t);
/// Correlated-projector sectors in the original picture.
SectorState appendix_tcl_sectors(const ModelSpec& spec, const DensityMatrix& rho0, double t);

/// integral_0^t f, with f(t1) = N integral_0^t1 cos^{N-1}(A tau/2) cos(omega0 tau) dtau;
/// the thermal TCL population relaxes as exp(-(A^2/2) integral f).
double appendix_integrated_f(const ModelSpec& spec, double t);

}  // namespace spinstar
