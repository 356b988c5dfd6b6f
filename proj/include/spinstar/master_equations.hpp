#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spinstar/integrators.hpp"
#include "spinstar/model.hpp"
#include "spinstar/special.hpp"

namespace spinstar {

enum class ProjectorKind { ThermalProduct, Correlated };
enum class Equation { NZ, TCL };

std::string to_string(ProjectorKind kind);
std::string to_string(Equation eq);

/// Bath correlation Omega_{+/-}(t - t1) of the thermal projector, including
/// the detuning phase exp(i omega0 (t - t1)). sign is +1 or -1.
cplx omega_kernel(const ModelSpec& spec, int sign, double t, double t1);

/// Exponential expansion of Omega_{+/-} without the detuning phase:
/// Omega(tau) = sum weight exp(i freq tau), all weights positive.
std::vector<SpectralLine> omega_spectrum(const ModelSpec& spec, int sign, double drop_below = 1e-20);

/// Sector kernel of the correlated projector:
///   + : (j(j+1) - m(m+1)) exp(i A m tau)
///   - : (j(j+1) - m(m-1)) exp(i A (m-1) tau)
/// times exp(i omega0 tau). Out-of-range m gives 0.
cplx omega_tilde(HalfInt j, HalfInt m, int sign, const ModelSpec& spec, double t, double t1);

struct SectorKey {
  HalfInt j;
  HalfInt m;
  bool operator==(const SectorKey&) const = default;
};

/// Unnormalized central-spin matrices rho_jm = tr_B(Pi_jm rho), one per
/// retained bath sector.
struct SectorState {
  ModelSpec spec;
  std::vector<SectorKey> keys;
  std::vector<ComplexMatrix> blocks;
  /// Thermal weight of sectors left out.
  double dropped_weight = 0.0;

  double total_trace() const;
  /// Index of (j, m) in keys, or keys.size() when absent.
  std::size_t find(HalfInt j, HalfInt m) const;
};

/// rho_jm(0) = N_j exp(-beta m) rho0 / Z. Whole j ladders whose largest
/// weight is below relative_floor times the overall largest are dropped;
/// the default keeps every sector.
SectorState initial_sectors(const ModelSpec& spec, const DensityMatrix& rho0, double relative_floor = 0.0);

/// sum over sectors.
ComplexMatrix assemble_reduced(const SectorState& state);

struct SolverOptions {
  /// Internal step; 0 selects 1e-3 / A.
  double step = 0.0;
  double tolerance = 1e-12;
  int max_iterations = 10;
  /// Relative ladder-weight floor for the correlated projector.
  double sector_floor = 1e-14;
  /// Skip the back-transform and return interaction-picture states.
  bool interaction_picture = false;
  /// A sample whose trace deviates from 1 by more than this is treated as
  /// divergence (the TCL generator of the correlated projector amplifies
  /// round-off near resonance).
  double divergence_tolerance = 1e-8;
  /// Largest element magnitude accepted before a sample counts as diverged.
  double magnitude_bound = 2.0;
  /// On divergence return the samples before it (meta diverged_at) instead
  /// of throwing NumericalError.
  bool truncate_on_divergence = false;

  double internal_step(const ModelSpec& spec) const { return step > 0.0 ? step : 1e-3 / spec.A; }
};

/// Second-order NZ master equation for the chosen projector, returned in
/// the original (Schrodinger) picture unless options say otherwise.
TimeSeries nz_solve(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, const GridSpec& grid,
                    const SolverOptions& options = {});

/// Second-order TCL master equation; coefficients integrated analytically.
TimeSeries tcl_solve(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, const GridSpec& grid,
                     const SolverOptions& options = {});

TimeSeries master_solve(const ModelSpec& spec, ProjectorKind projector, Equation equation, const DensityMatrix& rho0,
                        const GridSpec& grid, const SolverOptions& options = {});

/// Evolves explicit correlated-projector sectors; the observer receives
/// interaction-picture states. Every sector of a ladder that is present
/// must be present in full.
void solve_sectors(Equation equation, const SectorState& initial, const GridSpec& grid, const SolverOptions& options,
                   const std::function<void(double, const SectorState&)>& observe);

/// Thermal projector: element (a, b) with q = m_a - m_b gets
/// exp(-i omega0 q t) [cos((A q t - i beta)/2) / cosh(beta/2)]^N, the
/// Boltzmann-weighted average of the per-sector rotations.
ComplexMatrix back_transform(const ModelSpec& spec, const ComplexMatrix& rho_interaction, double t);

/// Correlated projector: sector (j, m) element (a, b) gets
/// exp(-i (omega0 + A m) q t).
SectorState back_transform(const SectorState& interaction, double t);

/// Applies the thermal back-transform to every sample. The correlated
/// back-transform acts on sectors and is not available from reduced states.
TimeSeries back_transform(ProjectorKind projector, const TimeSeries& interaction);

/// Generators exposed for diagnostics and tests. State layout for the
/// thermal projector is row-major k x k; for sectors it is described by
/// the returned map.
SeparableGenerator thermal_generator(const ModelSpec& spec, double drop_below = 1e-20);

struct SectorLayout {
  /// state index -> (sector, row, col)
  struct Slot {
    std::size_t sector, row, col;
  };
  std::vector<Slot> slots;
};
SeparableGenerator correlated_generator(const SectorState& state, const std::vector<int>& coherence_orders,
                                        SectorLayout& layout);

/// Literal memory integrand of the thermal NZ equation built from the
/// operators S+ exp(-i A S_z t) and the kernels omega_kernel, for
/// cross-checking the separable route with volterra_solve. Acts on
/// row-major vectorized k x k matrices.
KernelFunction thermal_kernel_direct(const ModelSpec& spec);

}  // namespace spinstar
