#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinstar/integrators.hpp"
#include "spinstar/master_equations.hpp"
#include "spinstar/model.hpp"
#include "spinstar/report.hpp"

namespace spinstar {

enum class Method {
  Exact,
  Oracle,
  NzP1,
  TclP1,
  NzP2,
  TclP2,
  ClosedNz2,
  ClosedTclLargeM,
  AppendixExact,
  AppendixTclP1,
  AppendixTclP2,
};

std::string to_string(Method m);
/// Accepts the upper-case names (EXACT, NZ_P1, ...); throws ConfigError.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

struct InitialState {
  enum class Kind { Basis, Random, PlusX, Matrix };
  Kind kind = Kind::Basis;
  /// Basis: projection m of |j1 m>.
  HalfInt m = kHalf;
  std::uint64_t seed = 0;
  /// Matrix: explicit entries, validated against j1 on build.
  ComplexMatrix matrix;

  /// "basis 1", "random 7", "plus_x" or "matrix 0.5 0.5; 0.5 0.5" with
  /// complex entries written re:im.
  static InitialState parse(const std::string& text);
  DensityMatrix build(HalfInt j1) const;
  std::string describe() const;
};

struct Scenario {
  std::string name = "scenario";
  ModelSpec model;
  InitialState initial;
  std::vector<Method> methods;
  GridSpec grid{0.0, 1.0, 0.01};
  std::vector<Observable> observables;
  std::string output = ".";
  SolverOptions solver;
  bool oracle_allow_large = false;
  Method reference = Method::Exact;
  double threshold = 0.05;
  std::string sweep_param;
  std::vector<double> sweep_values;

  Scenario() { solver.truncate_on_divergence = true; }

  /// Throws ConfigError naming every method incompatible with the model,
  /// state or grid, and GuardError for ORACLE beyond the bath-size guard.
  void validate() const;
  /// The observables, or the populations when none were given.
  std::vector<Observable> selected_observables() const;
};

/// INI-style configuration; errors are reported as "<source>:<line>: ...".
///
///   [model]   j1, N, beta, A, omega0
///   [initial] state
///   [grid]    t_start, t_end, step, max_steps
///   [run]     name, methods, observables, output, oracle_allow_large
///   [solver]  step, tolerance, max_iterations, sector_floor, truncate_on_divergence
///   [compare] reference, threshold
///   [sweep]   param, values
Scenario parse_config(std::istream& is, const std::string& source = "config");
Scenario load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Scenarios reproducing one figure, one per curve family.
std::vector<Scenario> preset(const std::string& name);

/// Evaluates one method on the scenario grid.
TimeSeries run_method(const Scenario& s, Method m);

/// Populations of the spin-1 correlated-projector blocks summed over all
/// sectors, from the NZ Laplace solution or the large-m TCL form.
/// Requires j1 = 1, omega0 = 0 and a diagonal initial state.
TimeSeries closed_j1_series(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid, bool large_m_tcl);

struct MethodOutcome {
  Method method = Method::Exact;
  /// ok, diverged, failed
  std::string status = "ok";
  std::string message;
  int exit_code = 0;
  TimeSeries series;
  std::vector<std::string> files;
};

struct RunResult {
  std::vector<MethodOutcome> outcomes;
  std::vector<ComparisonReport> comparisons;
  std::string summary_path;
  int exit_code = 0;
};

/// Runs every method, writes one CSV per (method, observable), a gnuplot
/// script and a JSON summary into s.output. Method failures are recorded
/// per method; the exit code is the most severe one.
RunResult run_scenario(const Scenario& s);

/// As run_scenario, plus comparisons of every method against s.reference.
RunResult compare_scenario(const Scenario& s);

struct SweepResult {
  std::string param;
  std::vector<double> values;
  /// horizons[method index][value index]
  std::vector<Method> methods;
  std::vector<std::vector<double>> horizons;
  std::vector<PowerLawFit> fits;
  std::vector<bool> fitted;
  std::string csv_path;
  std::string summary_path;
};

/// Horizon of each method against s.reference as a function of one
/// parameter (N, beta or A) with power-law fits. Needs >= 2 distinct values.
SweepResult sweep_scenario(const Scenario& s);

struct OracleCheck {
  std::string reference;
  double max_error = 0.0;
  double tolerance = 1e-8;
  bool passed() const { return max_error <= tolerance; }
};

/// Compares the exact formula (or the detuned spin-1/2 exact solution)
/// with the full-space oracle on the scenario grid.
OracleCheck oracle_check(const Scenario& s);

}  // namespace spinstar
