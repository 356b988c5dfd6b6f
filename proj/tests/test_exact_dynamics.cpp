#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spinstar/brute_force.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/exact_dynamics.hpp"

using namespace spinstar;
using std::numbers::pi;

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
}  // namespace

TEST_SUITE("exact_dynamics") {

TEST_CASE("period") {
  CHECK(period(spec(HalfInt(1), 4, 0.0)) == doctest::Approx(2 * pi));
  CHECK(period(spec(kHalf, 4, 0.0)) == doctest::Approx(4 * pi));
  CHECK(period(spec(HalfInt(1), 4, 0.0, 2.0)) == doctest::Approx(pi));
  CHECK(period(spec(kHalf, 3, 0.0)) == doctest::Approx(2 * pi));
}

TEST_CASE("t = 0 returns the initial state") {
  const auto rho0 = DensityMatrix::basis_state(HalfInt(1), HalfInt(1));
  CHECK(exact_element(spec(HalfInt(1), 101, 0.25), rho0, HalfInt(1), HalfInt(1), 0.0).real() == doctest::Approx(1.0));
  const auto r = DensityMatrix::random(HalfInt(2), 3);
  auto ts = exact_evolve(spec(HalfInt(2), 50, 0.5), r, GridSpec{0.0, 0.0, 0.1});
  REQUIRE(ts.values.size() == 1u);
  CHECK(max_abs_diff(ts.values[0], r.matrix()) <= 1e-12);
}

TEST_CASE("fig1 curve is periodic and bounded") {
  const auto rho0 = DensityMatrix::basis_state(HalfInt(3), HalfInt(1));
  const auto s = spec(HalfInt(3), 200, 0.25);
  ExactPropagator p(s, rho0);
  CHECK(max_abs_diff(p.at(2 * pi), rho0.matrix()) <= 1e-8);
  for (double t = 0.0; t < 2 * pi; t += 0.05) {
    const double pop = p.element(index_of(HalfInt(3), HalfInt(1)), index_of(HalfInt(3), HalfInt(1)), t).real();
    REQUIRE(pop >= -1e-10);
    REQUIRE(pop <= 1.0 + 1e-10);
  }
}

TEST_CASE("matches the brute-force oracle") {
  const auto s = spec(HalfInt(1), 4, 0.25);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 11);
  BruteForcePropagator bf(s);
  ExactPropagator ex(s, rho0);
  for (double t : {0.3, 1.0, 2.7, 5.5}) CHECK(max_abs_diff(ex.at(t), bf.evolve(rho0.matrix(), s.beta, t)) <= 1e-8);
}

TEST_CASE("every sample is a density matrix") {
  const auto s = spec(HalfInt(1), 6, 0.5);
  const auto ts = exact_evolve(s, DensityMatrix::random(HalfInt(1), 5), GridSpec{0.0, 10.0, 0.05});
  CHECK(ts.max_trace_defect() <= 1e-10);
  CHECK(ts.max_hermiticity_defect() <= 1e-12);
  CHECK(ts.min_eigenvalue() >= -1e-10);
}

TEST_CASE("higher beta raises the population of |2,1> (fig2)") {
  const auto rho0 = DensityMatrix::basis_state(HalfInt(2), HalfInt(1));
  const GridSpec g{0.0, 2 * pi, 0.01};
  double prev = -1.0;
  for (double beta : {0.0, 0.25, 0.5}) {
    const auto ts = exact_evolve(spec(HalfInt(2), 101, beta), rho0, g);
    double excited = 0.0;
    for (const auto& m : ts.values) excited += m(1, 1).real();
    excited /= static_cast<double>(ts.values.size());
    CHECK(excited > prev);
    prev = excited;
  }
}

TEST_CASE("resonance required") {
  CHECK_THROWS_AS(exact_evolve(spec(kHalf, 2, 0.0, 1.0, 2.0), DensityMatrix::basis_state(kHalf, kHalf), GridSpec{0, 1, 0.1}),
                  ConfigError);
}

TEST_CASE("brute force: A -> 0 freezes the state") {
  const auto s = spec(HalfInt(1), 3, 0.25, 1e-12);
  const auto rho0 = DensityMatrix::random(HalfInt(1), 2);
  const auto ts = brute_force_evolve(s, rho0, GridSpec{0.0, 10.0, 0.5});
  for (const auto& m : ts.values) CHECK(max_abs_diff(m, rho0.matrix()) <= 1e-9);
}

TEST_CASE("brute force: bath-size guard") {
  CHECK_THROWS_AS(BruteForcePropagator(spec(kHalf, 9, 0.0)), GuardError);
  CHECK_NOTHROW(BruteForcePropagator(spec(kHalf, 9, 0.0), BruteForceOptions{true}));
}

TEST_CASE("brute force: period and low temperature") {
  const auto s = spec(kHalf, 4, 50.0);
  const auto rho0 = DensityMatrix::random(kHalf, 9);
  BruteForcePropagator bf(s);
  CHECK(max_abs_diff(bf.evolve(rho0.matrix(), s.beta, period(s)), rho0.matrix()) <= 1e-8);
  // at beta = 50 the bath sits in |N/2, -N/2>; only j = 2 contributes
  ExactPropagator ex(s, rho0);
  for (double t : {0.4, 1.3, 3.0}) CHECK(max_abs_diff(ex.at(t), bf.evolve(rho0.matrix(), s.beta, t)) <= 1e-6);
  // the all-up bath (sector -N/2 of the J_z = -beta convention) reached by beta -> infinity
  CHECK(max_abs_diff(bf.evolve(rho0.matrix(), 50.0, 0.7), bf.evolve(rho0.matrix(), 200.0, 0.7)) <= 1e-6);
}

TEST_CASE("brute force: detuned Hamiltonian still unitary") {
  const auto s = spec(HalfInt(1), 4, 0.25, 1.0, 2.0);
  const auto ts = brute_force_evolve(s, DensityMatrix::random(HalfInt(1), 4), GridSpec{0.0, 3.0, 0.1});
  CHECK(ts.max_trace_defect() <= 1e-10);
  CHECK(ts.min_eigenvalue() >= -1e-10);
}

}
