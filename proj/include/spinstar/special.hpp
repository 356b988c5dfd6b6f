#pragma once

#include <vector>

#include "spinstar/complex_matrix.hpp"

namespace spinstar {

/// cos(z)^n for a complex argument.
///
/// Evaluated as exp(n log cos z); for integer n the principal branch is
/// exact, so no branch bookkeeping is needed. Close to a zero of cos z the
/// logarithm loses relative accuracy and direct binary powering is used.
cplx stable_cos_pow(int n, cplx z);

/// n * log(cos z) on the principal branch; -inf real part at zeros.
cplx log_cos(cplx z);

/// Integral of exp(i mu s) over s in [0, t].
cplx phase_integral(double mu, double t);

/// Integral over t1 in [0, t] of phase_integral(mu, t1).
cplx double_phase_integral(double mu, double t);

/// One term weight * exp(i freq tau) of a spectral expansion.
struct SpectralLine {
  double weight;
  double freq;
};

/// cos^n((x + i b)/2) expanded as sum_k weight_k exp(i freq_k x) with
/// freq_k = (n - 2k)/2 and positive weights C(n,k) exp(-(n-2k) b/2) / 2^n,
/// each scaled by exp(log_scale). Lines below drop_below * (largest weight)
/// are omitted.
std::vector<SpectralLine> cos_pow_spectrum(int n, double b, double log_scale = 0.0, double drop_below = 1e-20);

}  // namespace spinstar
