#include <doctest.h>

#include <cmath>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/closed_forms.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/exact_dynamics.hpp"
#include "spinstar/master_equations.hpp"
#include "spinstar/scenario.hpp"

using namespace spinstar;

namespace {
ModelSpec spec(HalfInt j1, int N, double beta, double A = 1.0, double omega0 = 0.0) {
  ModelSpec s;
  s.j1 = j1;
  s.N = N;
  s.beta = beta;
  s.A = A;
  s.omega0 = omega0;
  return s;
}

DensityMatrix diagonal_state(HalfInt j1, std::vector<double> p) {
  ComplexMatrix m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = p[i];
  return DensityMatrix(j1, m);
}

constexpr ProjectorKind kP[] = {ProjectorKind::ThermalProduct, ProjectorKind::Correlated};
constexpr Equation kE[] = {Equation::NZ, Equation::TCL};
}  // namespace

TEST_SUITE("master_equations") {

TEST_CASE("omega kernel examples") {
  CHECK(std::abs(omega_kernel(spec(kHalf, 101, 0.0), +1, 0.7, 0.7) - 50.5) <= 1e-12);
  CHECK(std::abs(omega_kernel(spec(kHalf, 1, 0.0), +1, 1.3, 0.2) - std::polar(0.5, -0.55)) <= 1e-15);
  for (double t : {0.0, 0.4, 3.0, 17.0}) {
    const auto s = spec(HalfInt(1), 101, 0.0);
    CHECK(omega_kernel(s, +1, t, 0.1) == omega_kernel(s, -1, t, 0.1));
  }
  // detuning only adds a phase
  const auto a = spec(kHalf, 7, 0.3), b = spec(kHalf, 7, 0.3, 1.0, 2.5);
  CHECK(std::abs(omega_kernel(b, -1, 2.0, 0.5) - omega_kernel(a, -1, 2.0, 0.5) * std::polar(1.0, 2.5 * 1.5)) <= 1e-12);
  CHECK(omega_kernel(spec(kHalf, 7, 0.3, 1.0, 0.0), +1, 2.0, 0.5) == omega_kernel(a, +1, 2.0, 0.5));
}

TEST_CASE("omega spectrum reproduces the kernel") {
  const auto s = spec(HalfInt(1), 30, 0.25);
  for (int sign : {+1, -1}) {
    const auto lines = omega_spectrum(s, sign);
    for (double tau : {0.0, 0.3, 2.2, 9.0}) {
      cplx sum{};
      for (const auto& l : lines) {
        CHECK(l.weight > 0.0);
        sum += l.weight * std::polar(1.0, l.freq * tau);
      }
      CHECK(std::abs(sum - omega_kernel(s, sign, tau, 0.0)) <= 1e-10);
    }
  }
}

TEST_CASE("omega tilde examples") {
  const auto s = spec(HalfInt(1), 4, 0.0);
  for (HalfInt j : {kHalf, HalfInt(1), HalfInt(2)}) {
    CHECK(omega_tilde(j, j, +1, s, 1.0, 0.2) == cplx{});
    CHECK(omega_tilde(j, -j, -1, s, 1.0, 0.2) == cplx{});
  }
  CHECK(omega_tilde(HalfInt(1), HalfInt(0), +1, s, 0.3, 0.3) == cplx{2.0});
  CHECK(omega_tilde(HalfInt(1), HalfInt(2), +1, s, 0.3, 0.1) == cplx{});
  CHECK(std::abs(omega_tilde(HalfInt(2), HalfInt(1), -1, s, 1.5, 0.5) - 6.0) <= 1e-14);
}

TEST_CASE("initial sectors") {
  const auto rho0 = DensityMatrix::random(HalfInt(1), 1);
  auto st = initial_sectors(spec(HalfInt(1), 6, 0.0), rho0);
  CHECK(std::abs(st.total_trace() - 1.0) <= 1e-12);
  const std::size_t i = st.find(HalfInt(1), HalfInt(0));
  REQUIRE(i < st.keys.size());
  CHECK(max_abs_diff(st.blocks[i], rho0.matrix() * cplx{9.0 / 64.0}) <= 1e-15);
  CHECK(max_abs_diff(assemble_reduced(st), rho0.matrix()) <= 1e-14);

  st = initial_sectors(spec(HalfInt(1), 2, 0.7), rho0);
  CHECK(st.keys.size() == 4u);
  CHECK(std::abs(st.total_trace() - 1.0) <= 1e-12);

  st = initial_sectors(spec(HalfInt(1), 4, 0.5), rho0);
  const std::size_t k = st.find(HalfInt(2), HalfInt(-2));
  CHECK(std::abs(st.blocks[k].trace().real() - std::exp(1.0) / partition_function(4, 0.5)) <= 1e-15);

  st = initial_sectors(spec(HalfInt(1), 400, 0.5), rho0);
  CHECK(std::abs(st.total_trace() - 1.0) <= 1e-12);
}

TEST_CASE("back transforms") {
  ComplexMatrix d(2);
  d(0, 0) = 0.3;
  d(1, 1) = 0.7;
  const auto s = spec(kHalf, 101, 0.25, 1.0, 3.0);
  const ComplexMatrix out = back_transform(s, d, 1.7);
  CHECK(out(0, 0) == d(0, 0));
  CHECK(out(1, 1) == d(1, 1));

  ComplexMatrix c(2);
  c(0, 1) = 1.0;
  const auto s0 = spec(kHalf, 101, 0.0, 1.0, 51.0);
  for (double t : {0.2, 1.0, 2.9}) {
    const cplx want = std::polar(1.0, -51.0 * t) * std::pow(std::cos(0.5 * t), 101);
    CHECK(std::abs(back_transform(s0, c, t)(0, 1) - want) <= 1e-14);
  }

  SectorState st;
  st.spec = s0;
  st.keys.push_back({HalfInt(3), HalfInt(-2)});
  st.blocks.push_back(c);
  const SectorState o = back_transform(st, 0.8);
  CHECK(std::abs(o.blocks[0](0, 1) - std::polar(1.0, -(51.0 - 2.0) * 0.8)) <= 1e-14);
  CHECK(max_abs_diff(assemble_reduced(o), o.blocks[0]) == 0.0);
}

TEST_CASE("vanishing coupling leaves the state alone") {
  const auto s = spec(HalfInt(1), 20, 0.25, 1e-9);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 8);
  SolverOptions o;
  o.step = 0.01;
  for (auto p : kP)
    for (auto e : kE) {
      SolverOptions oi = o;
      oi.interaction_picture = true;
      const auto ts = master_solve(s, p, e, rho0, GridSpec{0.0, 5.0, 0.1}, oi);
      for (const auto& m : ts.values) REQUIRE(max_abs_diff(m, rho0.matrix()) <= 1e-12);
    }
}

TEST_CASE("thermal NZ separable route matches the literal kernel") {
  const auto s = spec(HalfInt(1), 9, 0.25);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 3);
  const GridSpec g{0.0, 2.0, 0.02};
  SolverOptions o;
  o.interaction_picture = true;
  const auto sep = nz_solve(s, ProjectorKind::ThermalProduct, rho0, g, o);
  VolterraOptions vo;
  vo.substeps = 20;
  const auto lit = volterra_solve(thermal_kernel_direct(s),
                                  StateVector(rho0.matrix().data().begin(), rho0.matrix().data().end()), g, vo);
  double worst = 0.0;
  for (std::size_t i = 0; i < sep.times.size(); ++i)
    for (std::size_t k = 0; k < 9; ++k) worst = std::max(worst, std::abs(sep.values[i].data()[k] - lit.states[i][k]));
  CHECK(worst <= 1e-5);
}

TEST_CASE("conservation and Hermiticity for every solver") {
  const auto s = spec(HalfInt(1), 21, 0.25);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 4);
  for (auto p : kP)
    for (auto e : kE) {
      const auto ts = master_solve(s, p, e, rho0, GridSpec{0.0, 1.0, 0.01});
      REQUIRE(ts.times.size() == 101u);
      CHECK(ts.max_trace_defect() <= 1e-8);
      CHECK(ts.max_hermiticity_defect() <= 1e-10);
    }
}

TEST_CASE("correlated projector: block constant and diagonal decoupling") {
  const auto s = spec(HalfInt(1), 11, 0.25);
  const auto init = initial_sectors(s, diagonal_state(HalfInt(1), {0.5, 0.3, 0.2}));
  for (auto e : kE) {
    double worst_c = 0.0, worst_off = 0.0;
    std::vector<double> c0;
    solve_sectors(e, init, GridSpec{0.0, 1.0, 0.05}, {}, [&](double, const SectorState& st) {
      std::vector<double> cs;
      for (std::size_t i = 0; i < st.keys.size(); ++i) {
        const auto& b = st.blocks[i];
        worst_off = std::max({worst_off, std::abs(b(0, 1)), std::abs(b(0, 2)), std::abs(b(1, 2)), std::abs(b(2, 0))});
        const HalfInt j = st.keys[i].j, m = st.keys[i].m;
        auto pop = [&](HalfInt mm, std::size_t row) {
          const std::size_t k = st.find(j, mm);
          return k < st.keys.size() ? st.blocks[k](row, row).real() : 0.0;
        };
        cs.push_back(pop(m - HalfInt(1), 0) + pop(m, 1) + pop(m + HalfInt(1), 2));
      }
      if (c0.empty()) c0 = cs;
      for (std::size_t i = 0; i < cs.size(); ++i) worst_c = std::max(worst_c, std::abs(cs[i] - c0[i]));
    });
    CHECK(worst_c <= 1e-8);
    CHECK(worst_off == 0.0);
  }
}

TEST_CASE("correlated NZ matches the closed-form blocks (N=101)") {
  const auto s = spec(HalfInt(1), 101, 0.25);
  const auto rho0 = DensityMatrix::basis_state(HalfInt(1), HalfInt(1));
  const GridSpec g{0.0, 10.0, 0.05};
  const auto num = nz_solve(s, ProjectorKind::Correlated, rho0, g);
  const auto closed = closed_j1_series(s, rho0, g, false);
  REQUIRE(num.times.size() == closed.times.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < num.times.size(); ++i)
    worst = std::max(worst, std::abs(num.values[i](0, 0) - closed.values[i](0, 0)));
  CHECK(worst <= 1e-4);
}

TEST_CASE("all methods agree at second order") {
  const auto s = spec(HalfInt(1), 101, 0.25);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 12);
  const GridSpec g{0.0, 0.01, 0.01};
  const ComplexMatrix ex = ExactPropagator(s, rho0).at(0.01);
  for (auto p : kP)
    for (auto e : kE) CHECK(max_abs_diff(master_solve(s, p, e, rho0, g).values.back(), ex) <= 1e-5);
}

TEST_CASE("thermal TCL matches the detuned spin-1/2 closed form") {
  const auto s = spec(kHalf, 101, 0.0, 1.0, 51.0);
  const auto rho0 = DensityMatrix::random(kHalf, 2);
  const auto ts = tcl_solve(s, ProjectorKind::ThermalProduct, rho0, GridSpec{0.0, 2.0, 0.01});
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.times.size(); ++i)
    worst = std::max(worst, max_abs_diff(ts.values[i], appendix_tcl(s, ProjectorKind::ThermalProduct, rho0, ts.times[i])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("divergence is reported or truncated") {
  // correlated TCL at resonance amplifies round-off for large baths
  const auto s = spec(HalfInt(1), 51, 0.25);
  const auto rho0 = DensityMatrix::basis_state(HalfInt(1), HalfInt(1));
  const GridSpec g{0.0, 1.0, 0.01};
  CHECK_THROWS_AS(tcl_solve(s, ProjectorKind::Correlated, rho0, g), NumericalError);
  SolverOptions o;
  o.truncate_on_divergence = true;
  const auto ts = tcl_solve(s, ProjectorKind::Correlated, rho0, g, o);
  CHECK(ts.meta.count("diverged_at") == 1u);
  CHECK(ts.times.size() < g.count());
  CHECK(ts.max_trace_defect() <= 1e-8);
}

TEST_CASE("invalid inputs") {
  const auto rho0 = DensityMatrix::basis_state(kHalf, kHalf);
  CHECK_THROWS_AS(nz_solve(spec(HalfInt(1), 3, 0.0), ProjectorKind::ThermalProduct, rho0, GridSpec{0, 1, 0.1}), ConfigError);
  CHECK_THROWS_AS(nz_solve(spec(kHalf, 3, 0.0), ProjectorKind::ThermalProduct, rho0, GridSpec{0, 1, -0.1}), ConfigError);
  SectorState broken = initial_sectors(spec(kHalf, 3, 0.0), rho0);
  broken.keys.pop_back();
  broken.blocks.pop_back();
  CHECK_THROWS_AS(solve_sectors(Equation::NZ, broken, GridSpec{0, 1, 0.1}, {}, [](double, const SectorState&) {}),
                  ConfigError);
}

}
