#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/brute_force.hpp"
#include "spinstar/closed_forms.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/exact_dynamics.hpp"
#include "spinstar/scenario.hpp"

namespace py = pybind11;
using namespace spinstar;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// Spins come in as 1.5, "3/2" or 3.
HalfInt to_half(const py::handle& h) {
  if (py::isinstance<py::str>(h)) return HalfInt::parse(h.cast<std::string>());
  const double x = h.cast<double>();
  const double tw = 2.0 * x;
  if (std::abs(tw - std::round(tw)) > 1e-12) throw ConfigError("not a half-integer: " + std::to_string(x));
  return HalfInt::from_twice(static_cast<int>(std::lround(tw)));
}

ModelSpec make_model(const py::handle& j1, int N, double beta, double A, double omega0) {
  ModelSpec s;
  s.j1 = to_half(j1);
  s.N = N;
  s.beta = beta;
  s.A = A;
  s.omega0 = omega0;
  s.validate();
  return s;
}

ComplexMatrix to_matrix(const CArray& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ConfigError("expected a square matrix");
  const auto n = static_cast<std::size_t>(a.shape(0));
  ComplexMatrix m(n);
  auto r = a.unchecked<2>();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = r(i, j);
  return m;
}

CArray from_matrix(const ComplexMatrix& m) {
  CArray out({m.rows(), m.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
  return out;
}

DensityMatrix to_state(const ModelSpec& s, const CArray& rho0) {
  DensityMatrix d(s.j1, to_matrix(rho0));
  d.validate(1e-10);
  return d;
}

py::tuple series_arrays(const TimeSeries& ts) {
  const std::size_t n = ts.times.size(), k = ts.values.empty() ? 0 : ts.values[0].rows();
  py::array_t<double> times(n);
  CArray states({n, k, k});
  auto t = times.mutable_unchecked<1>();
  auto w = states.mutable_unchecked<3>();
  for (std::size_t i = 0; i < n; ++i) {
    t(i) = ts.times[i];
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) w(i, a, b) = ts.values[i](a, b);
  }
  return py::make_tuple(times, states, ts.meta);
}

}  // namespace

PYBIND11_MODULE(_spinstar, m) {
  m.doc() = "Central spin coupled to a spin-1/2 bath: exact dynamics and second-order master equations";

  static py::exception<Error> base(m, "SpinstarError");
  // bad input is also a ValueError for python callers
  static py::handle config_bases = py::make_tuple(py::handle(base.ptr()), py::handle(PyExc_ValueError)).release();
  static py::exception<ConfigError> config(m, "ConfigError", config_bases.ptr());
  static py::exception<NumericalError> numerical(m, "NumericalError", base.ptr());
  static py::exception<GuardError> guard(m, "GuardError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config.ptr(), e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    } catch (const GuardError& e) {
      PyErr_SetString(guard.ptr(), e.what());
    } catch (const std::invalid_argument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "clebsch_gordan",
      [](py::handle j1, py::handle m1, py::handle j2, py::handle m2, py::handle J, py::handle M) {
        return clebsch_gordan(to_half(j1), to_half(m1), to_half(j2), to_half(m2), to_half(J), to_half(M));
      },
      py::arg("j1"), py::arg("m1"), py::arg("j2"), py::arg("m2"), py::arg("J"), py::arg("M"));
  m.def("degeneracy", [](int N, py::handle j) { return degeneracy(N, to_half(j)); }, py::arg("N"), py::arg("j"));
  m.def("log_degeneracy", [](int N, py::handle j) { return log_degeneracy(N, to_half(j)); }, py::arg("N"), py::arg("j"));
  m.def("partition_function", &partition_function, py::arg("N"), py::arg("beta"));
  m.def("log_partition_function", &log_partition_function, py::arg("N"), py::arg("beta"));
  m.def(
      "period", [](py::handle j1, int N, double A) { return period(make_model(j1, N, 0.0, A, 0.0)); }, py::arg("j1"),
      py::arg("N"), py::arg("A") = 1.0);

  m.def("methods", [] {
    std::vector<std::string> out;
    for (Method k : all_methods()) out.push_back(to_string(k));
    return out;
  });

  m.def(
      "evolve",
      [](const std::string& method, py::handle j1, int N, double beta, double A, double omega0, const CArray& rho0,
         double t_end, double step, double t_start, bool truncate_on_divergence, bool oracle_allow_large) {
        Scenario s;
        s.model = make_model(j1, N, beta, A, omega0);
        s.initial.kind = InitialState::Kind::Matrix;
        s.initial.matrix = to_matrix(rho0);
        s.methods = {parse_method(method)};
        s.grid = {t_start, t_end, step};
        s.solver.truncate_on_divergence = truncate_on_divergence;
        s.oracle_allow_large = oracle_allow_large;
        s.validate();
        TimeSeries ts;
        {
          py::gil_scoped_release release;
          ts = run_method(s, s.methods[0]);
        }
        return series_arrays(ts);
      },
      py::arg("method"), py::arg("j1"), py::arg("N"), py::arg("beta"), py::arg("A") = 1.0, py::arg("omega0") = 0.0,
      py::arg("rho0"), py::arg("t_end"), py::arg("step"), py::arg("t_start") = 0.0,
      py::arg("truncate_on_divergence") = false, py::arg("oracle_allow_large") = false,
      "Returns (times, states[n, k, k], meta) for one method.");

  m.def(
      "exact_state",
      [](py::handle j1, int N, double beta, double A, const CArray& rho0, double t) {
        const ModelSpec s = make_model(j1, N, beta, A, 0.0);
        return from_matrix(ExactPropagator(s, to_state(s, rho0)).at(t));
      },
      py::arg("j1"), py::arg("N"), py::arg("beta"), py::arg("A") = 1.0, py::arg("rho0"), py::arg("t"));

  m.def(
      "oracle_state",
      [](py::handle j1, int N, double beta, double A, double omega0, const CArray& rho0, double t, bool allow_large) {
        const ModelSpec s = make_model(j1, N, beta, A, omega0);
        const DensityMatrix d = to_state(s, rho0);
        return from_matrix(BruteForcePropagator(s, {allow_large}).evolve(d.matrix(), beta, t));
      },
      py::arg("j1"), py::arg("N"), py::arg("beta"), py::arg("A") = 1.0, py::arg("omega0") = 0.0, py::arg("rho0"),
      py::arg("t"), py::arg("allow_large") = false);

  m.def(
      "nz2_block",
      [](py::handle j, py::handle mm, double A, double x0, double y0, double z0, double t) {
        J1BlockParams p{to_half(j), to_half(mm), A, x0 + y0 + z0};
        const BlockPopulations b = nz2_block(p, x0, y0, z0, t);
        return py::make_tuple(b.x, b.y, b.z);
      },
      py::arg("j"), py::arg("m"), py::arg("A"), py::arg("x0"), py::arg("y0"), py::arg("z0"), py::arg("t"));
  m.def(
      "tcl_j1_largem",
      [](py::handle j, py::handle mm, double A, double C, double x0, double z0, double t) {
        return tcl_j1_largem(J1BlockParams{to_half(j), to_half(mm), A, C}, x0, z0, t);
      },
      py::arg("j"), py::arg("m"), py::arg("A"), py::arg("C"), py::arg("x0"), py::arg("z0"), py::arg("t"));

  m.def(
      "random_state", [](py::handle j1, std::uint64_t seed) { return from_matrix(DensityMatrix::random(to_half(j1), seed).matrix()); },
      py::arg("j1"), py::arg("seed"));
  m.def(
      "basis_state",
      [](py::handle j1, py::handle mm) { return from_matrix(DensityMatrix::basis_state(to_half(j1), to_half(mm)).matrix()); },
      py::arg("j1"), py::arg("m"));
}
