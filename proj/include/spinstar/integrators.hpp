#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "spinstar/complex_matrix.hpp"

namespace spinstar {

/// Uniform output grid t_start, t_start + step, ..., up to t_end.
struct GridSpec {
  double t_start = 0.0;
  double t_end = 0.0;
  double step = 1e-3;
  std::size_t max_steps = 10'000'000;

  /// Throws ConfigError for a non-positive step or reversed bounds, and
  /// GuardError when the point count exceeds max_steps.
  void validate() const;
  /// Number of grid points including both ends.
  std::size_t count() const;
  double at(std::size_t i) const { return t_start + static_cast<double>(i) * step; }
  std::vector<double> times() const;
};

using StateVector = std::vector<cplx>;

/// Called at every output time with the current state.
using Observer = std::function<void(double t, const StateVector& y)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

/// dy = f(t, y); dy is pre-sized and zeroed by the caller.
using RhsFunction = std::function<void(double t, const StateVector& y, StateVector& dy)>;

/// Classical RK4 on [0, grid.t_end] starting from y0 at t = grid.t_start.
/// Each output interval is split into `substeps` equal steps.
void rk4_solve(const RhsFunction& rhs, StateVector y0, const GridSpec& grid, int substeps, const Observer& observe);
Trajectory rk4_solve(const RhsFunction& rhs, StateVector y0, const GridSpec& grid, int substeps = 1);

/// out += K(t, s) y(s)
using KernelFunction = std::function<void(double t, double s, const StateVector& ys, StateVector& out)>;

struct VolterraOptions {
  int substeps = 1;
  double tolerance = 1e-12;
  int max_iterations = 10;
};

/// y'(t) = integral_{t_start}^{t} K(t, s) y(s) ds.
///
/// Trapezoidal memory quadrature and a trapezoidal predictor-corrector in
/// time. Cost grows quadratically with the number of steps; meant for
/// small systems and cross-checks.
Trajectory volterra_solve(const KernelFunction& kernel, StateVector y0, const GridSpec& grid,
                          const VolterraOptions& options = {});

/// One contribution coef * exp(i lambda t) * (memory or time-local factor)
/// taken from component `in` and added to d/dt of component `out`.
struct SeparableTerm {
  std::size_t out = 0;
  std::size_t in = 0;
  cplx coef;
  double lambda = 0.0;
  double mu = 0.0;
};

/// Linear generator built from separable exponential terms.
///
/// Memory form:      y_out'(t) += coef e^{i lambda t} int_0^t e^{i mu s} y_in(s) ds
/// Time-local form:  y_out'(t) += coef e^{i lambda t} (int_0^t e^{i mu s} ds) y_in(t)
class SeparableGenerator {
 public:
  explicit SeparableGenerator(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  const std::vector<SeparableTerm>& terms() const { return terms_; }

  void add(const SeparableTerm& term);
  /// Merges terms sharing (out, in, lambda, mu) and drops coefficients that
  /// cancel to within rounding of the merged contributions.
  void compress();

  /// Sparse rows: row index -> (column, value).
  using SparseRows = std::vector<std::vector<std::pair<std::size_t, double>>>;
  /// Generator for w = to_new y, given y = to_old w (to_old = to_new^-1).
  SeparableGenerator change_basis(const SparseRows& to_new, const SparseRows& to_old) const;

  /// Largest |lambda|, |mu| or |lambda + mu|.
  double max_frequency() const;

 private:
  std::size_t dim_;
  std::vector<SeparableTerm> terms_;
};

struct MemoryOptions {
  double step = 1e-3;
  double tolerance = 1e-12;
  int max_iterations = 10;
};

/// Integrates the memory form on [0, t_end].
///
/// The memory integrals and the time step are evaluated with weights that
/// are exact for the exponential factors and linear in y across a step;
/// the implicit end-point contribution is resolved by fixed-point
/// correction. Throws NumericalError if the corrector does not settle.
void integrate_memory(const SeparableGenerator& gen, StateVector y0, const GridSpec& grid,
                      const MemoryOptions& options, const Observer& observe);

/// Integrates the time-local form with RK4, internal step <= options.step.
/// Each output interval is refined further when a Gershgorin bound on the
/// generator shows the fixed step would leave the RK4 stability region.
void integrate_time_local(const SeparableGenerator& gen, StateVector y0, const GridSpec& grid,
                          const MemoryOptions& options, const Observer& observe);

/// Number of internal steps per output interval so that step/substeps <= h.
int substeps_for(const GridSpec& grid, double h);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace spinstar
