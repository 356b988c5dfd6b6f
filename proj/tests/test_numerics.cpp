#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinstar/complex_matrix.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/hermitian_eigen.hpp"
#include "spinstar/integrators.hpp"
#include "spinstar/model.hpp"
#include "spinstar/special.hpp"

using namespace spinstar;
using std::numbers::pi;

namespace {

ComplexMatrix random_hermitian(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix m(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) {
      const cplx z{g(rng), r == c ? 0.0 : g(rng)};
      m(r, c) = z;
      m(c, r) = std::conj(z);
    }
  return m;
}

void check_decomposition(const ComplexMatrix& m) {
  const HermitianEigen e = hermitian_eigen(m);
  const std::size_t n = m.rows();
  for (std::size_t k = 1; k < n; ++k) REQUIRE(e.values[k - 1] <= e.values[k]);
  const ComplexMatrix vhv = e.vectors.adjoint() * e.vectors;
  CHECK(max_abs_diff(vhv, ComplexMatrix::identity(n)) <= 1e-10);
  ComplexMatrix d(n);
  for (std::size_t k = 0; k < n; ++k) d(k, k) = e.values[k];
  const ComplexMatrix rebuilt = e.vectors * d * e.vectors.adjoint();
  CHECK(max_abs_diff(rebuilt, m) <= 1e-9 * std::max(1.0, m.frobenius_norm()));
}

double cos_err(double h) {
  GridSpec g{0.0, 2.0, h};
  auto tr = volterra_solve([](double, double, const StateVector& ys, StateVector& out) { out[0] -= ys[0]; },
                           StateVector{1.0}, g);
  return std::abs(tr.states.back()[0] - std::cos(2.0));
}

double rk4_err(double h) {
  GridSpec g{0.0, 2.0, h};
  auto tr = rk4_solve([](double t, const StateVector& y, StateVector& dy) { dy[0] = cplx{0.0, 3.0} * (1.0 + 0.5 * t) * y[0]; },
                      StateVector{1.0}, g);
  const cplx exact = std::exp(cplx{0.0, 3.0} * (2.0 + 0.25 * 4.0));
  return std::abs(tr.states.back()[0] - exact);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("complex matrix basics") {
  ComplexMatrix a(2);
  a(0, 0) = 1.0;
  a(0, 1) = cplx{0.0, 2.0};
  a(1, 0) = cplx{0.0, -2.0};
  a(1, 1) = 3.0;
  CHECK(a.trace() == cplx{4.0, 0.0});
  CHECK(a.hermiticity_defect() == 0.0);
  CHECK(max_abs_diff(a.adjoint(), a) == 0.0);
  const ComplexMatrix k = kron(ComplexMatrix::identity(2), a);
  CHECK(k.rows() == 4u);
  CHECK(k(3, 2) == a(1, 0));
  CHECK(k(0, 2) == cplx{});
  CHECK(max_abs_diff(a * ComplexMatrix::identity(2), a) == 0.0);
  CHECK(a.all_finite());
}

TEST_CASE("eigen examples") {
  auto e = hermitian_eigen(ComplexMatrix::identity(3));
  CHECK(e.values == std::vector<double>{1.0, 1.0, 1.0});
  ComplexMatrix d(2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  e = hermitian_eigen(d);
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  // S_z (x) I + I (x) s_z for two spins 1/2
  const ComplexMatrix sz = spin_z(kHalf), id = ComplexMatrix::identity(2);
  e = hermitian_eigen(kron(sz, id) + kron(id, sz));
  const std::vector<double> want{-1.0, 0.0, 0.0, 1.0};
  for (std::size_t k = 0; k < 4; ++k) CHECK(e.values[k] == doctest::Approx(want[k]).epsilon(1e-14));
}

TEST_CASE("eigen random Hermitian up to dim 64") {
  for (std::size_t n : {1u, 2u, 5u, 9u, 32u, 64u}) check_decomposition(random_hermitian(n, static_cast<unsigned>(n)));
}

TEST_CASE("eigen on the spin-star Hamiltonian is exact for S.J") {
  // j1 = 1 coupled to spin 1: S.J eigenvalues (J(J+1) - 4)/2 for J = 0, 1, 2
  const ComplexMatrix sz = spin_z(HalfInt(1)), sp = spin_plus(HalfInt(1)), sm = spin_minus(HalfInt(1));
  const ComplexMatrix H = kron(sz, sz) + (kron(sp, sm) + kron(sm, sp)) * cplx{0.5};
  const auto e = hermitian_eigen(H);
  CHECK(e.values.front() == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(e.values.back() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("special: stable_cos_pow against 200-bit references") {
  CHECK(stable_cos_pow(0, cplx{0.7, 0.3}) == cplx{1.0, 0.0});
  CHECK(std::abs(stable_cos_pow(2, 0.4) - std::cos(0.4) * std::cos(0.4)) <= 1e-15);
  auto rel = [](cplx got, cplx want) { return std::abs(got - want) / std::abs(want); };
  CHECK(rel(stable_cos_pow(100, cplx{0.3, 0.125} / 2.0), {0.2317283650441834344658167, -0.3195251170340279612324816}) <= 1e-12);
  // close to a zero of cos
  CHECK(rel(stable_cos_pow(7, cplx{3.1410, 0.0004} / 2.0), {-3.942462217231934099947191e-25, 6.337848611386332335517681e-25}) <= 1e-12);
  CHECK(rel(stable_cos_pow(37, cplx{1.7, -0.3}), {-3.037980131256530178276396e-19, -1.619674850780798144017789e-18}) <= 1e-12);
}

TEST_CASE("special: phase integrals") {
  for (double mu : {0.0, 1e-9, 0.3, -2.0, 51.0})
    for (double t : {0.0, 0.01, 1.3, 7.0}) {
      // Simpson reference
      const int n = 20000;
      cplx s1{}, s2{};
      for (int i = 0; i <= n; ++i) {
        const double x = t * i / n, w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        s1 += w * std::exp(cplx{0.0, mu * x});
        s2 += w * phase_integral(mu, x);
      }
      s1 *= t / (3.0 * n);
      s2 *= t / (3.0 * n);
      REQUIRE(std::abs(phase_integral(mu, t) - s1) <= 1e-10);
      REQUIRE(std::abs(double_phase_integral(mu, t) - s2) <= 1e-9);
    }
}

TEST_CASE("special: cos power spectrum reconstructs the power") {
  for (int n : {0, 1, 6, 100})
    for (double b : {0.0, 0.25, -0.5}) {
      const auto lines = cos_pow_spectrum(n, b, 0.0, 0.0);
      for (double x : {0.0, 0.7, 2.5}) {
        cplx s{};
        for (const auto& l : lines) s += l.weight * std::exp(cplx{0.0, l.freq * x});
        const cplx want = stable_cos_pow(n, cplx{x, b} / 2.0);
        REQUIRE(std::abs(s - want) <= 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((GridSpec{1.0, 0.0, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 1e-9}.validate()), GuardError);
  GridSpec g{0.0, 1.0, 0.25};
  CHECK(g.count() == 5u);
  CHECK(g.at(4) == 1.0);
}

TEST_CASE("rk4 examples and order") {
  GridSpec g{0.0, pi, pi / 1000};
  auto tr = rk4_solve([](double, const StateVector& y, StateVector& dy) { dy[0] = cplx{0.0, 1.0} * y[0]; }, StateVector{1.0}, g);
  CHECK(std::abs(tr.states.back()[0] + 1.0) <= 1e-10);
  auto c = rk4_solve([](double, const StateVector&, StateVector&) {}, StateVector{2.0, cplx{0, 1}}, GridSpec{0.0, 1.0, 0.1});
  CHECK(c.states.back() == StateVector{2.0, cplx{0, 1}});
  const double order = std::log2(rk4_err(0.02) / rk4_err(0.01));
  CHECK(order >= 3.9);
}

TEST_CASE("volterra examples and order") {
  CHECK(cos_err(1e-3) <= 1e-6);
  const double order = std::log2(cos_err(0.02) / cos_err(0.01));
  CHECK(order >= 1.9);
  auto z = volterra_solve([](double, double, const StateVector&, StateVector&) {}, StateVector{0.5}, GridSpec{0.0, 1.0, 0.1});
  for (const auto& s : z.states) CHECK(s[0] == cplx{0.5});
}

TEST_CASE("steppers are deterministic") {
  auto a = rk4_solve([](double t, const StateVector& y, StateVector& dy) { dy[0] = std::sin(t) * y[0]; }, StateVector{1.0},
                     GridSpec{0.0, 3.0, 0.01});
  auto b = rk4_solve([](double t, const StateVector& y, StateVector& dy) { dy[0] = std::sin(t) * y[0]; }, StateVector{1.0},
                     GridSpec{0.0, 3.0, 0.01});
  CHECK(a.states == b.states);
}

TEST_CASE("separable memory integrator matches the trapezoid Volterra solver") {
  // y0' = int e^{i(t-s)} y1(s) ds, y1' = -int e^{-2i(t-s)} y0(s) ds
  SeparableGenerator gen(2);
  gen.add({0, 1, 1.0, 1.0, -1.0});
  gen.add({1, 0, -1.0, -2.0, 2.0});
  GridSpec grid{0.0, 4.0, 0.05};
  std::vector<StateVector> sep;
  integrate_memory(gen, StateVector{1.0, 0.0}, grid, {1e-3, 1e-12, 10},
                   [&](double, const StateVector& y) { sep.push_back(y); });
  VolterraOptions vo;
  vo.substeps = 50;
  auto ref = volterra_solve(
      [](double t, double s, const StateVector& ys, StateVector& out) {
        out[0] += std::exp(cplx{0.0, t - s}) * ys[1];
        out[1] -= std::exp(cplx{0.0, -2.0 * (t - s)}) * ys[0];
      },
      StateVector{1.0, 0.0}, grid, vo);
  double worst = 0.0;
  for (std::size_t i = 0; i < sep.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(sep[i][k] - ref.states[i][k]));
  CHECK(worst <= 1e-5);
}

TEST_CASE("time-local integrator matches RK4 with explicit coefficients") {
  SeparableGenerator gen(2);
  gen.add({0, 1, cplx{0.0, 2.0}, 0.5, 1.0});
  gen.add({1, 0, cplx{0.0, 2.0}, -0.5, -1.0});
  GridSpec grid{0.0, 3.0, 0.1};
  std::vector<StateVector> got;
  integrate_time_local(gen, StateVector{1.0, 0.0}, grid, {1e-3, 1e-12, 10}, [&](double, const StateVector& y) { got.push_back(y); });
  auto ref = rk4_solve(
      [](double t, const StateVector& y, StateVector& dy) {
        dy[0] = cplx{0.0, 2.0} * std::exp(cplx{0.0, 0.5 * t}) * phase_integral(1.0, t) * y[1];
        dy[1] = cplx{0.0, 2.0} * std::exp(cplx{0.0, -0.5 * t}) * phase_integral(-1.0, t) * y[0];
      },
      StateVector{1.0, 0.0}, grid, 100);
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(got[i][k] - ref.states[i][k]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("time-local integrator keeps scalar modes below the double range") {
  // real rate -2000 sin t: |y| reaches exp(-4000) at t = pi, back to 1 at 2 pi
  SeparableGenerator gen(1);
  gen.add({0, 0, cplx{-2000.0, 0.0}, 0.0, 1.0});
  gen.compress();
  std::vector<StateVector> got;
  const double two_pi = 2.0 * std::numbers::pi;
  integrate_time_local(gen, StateVector{1.0}, GridSpec{0.0, two_pi, two_pi / 100}, {1e-4, 1e-12, 10},
                       [&](double, const StateVector& y) { got.push_back(y); });
  CHECK(std::abs(got.back()[0] - 1.0) <= 1e-8);
}

TEST_CASE("generator basis change and cancellation") {
  SeparableGenerator gen(2);
  // y0' = y1 - y0, y1' = y0 - y1: the sum is conserved
  gen.add({0, 0, -1.0, 0.0, 0.0});
  gen.add({0, 1, 1.0, 0.0, 0.0});
  gen.add({1, 0, 1.0, 0.0, 0.0});
  gen.add({1, 1, -1.0, 0.0, 0.0});
  gen.compress();
  const SeparableGenerator::SparseRows to_new{{{0, 1.0}, {1, 1.0}}, {{1, 1.0}, {0, -1.0}}};
  const SeparableGenerator::SparseRows to_old{{{0, 0.5}, {1, -0.5}}, {{0, 0.5}, {1, 0.5}}};
  const SeparableGenerator w = gen.change_basis(to_new, to_old);
  REQUIRE(w.terms().size() == 1u);
  CHECK(w.terms()[0].out == 1u);
  CHECK(w.terms()[0].in == 1u);
  CHECK(w.terms()[0].coef.real() == doctest::Approx(-2.0));
  CHECK_THROWS_AS(gen.change_basis(to_new, {}), ConfigError);
}

}

TEST_SUITE("slow") {

TEST_CASE("eigen random Hermitian dim 1024 stays unitary") {
  const ComplexMatrix m = random_hermitian(1024, 7);
  const HermitianEigen e = hermitian_eigen(m);
  const ComplexMatrix vhv = e.vectors.adjoint() * e.vectors;
  CHECK(max_abs_diff(vhv, ComplexMatrix::identity(1024)) <= 1e-10);
  ComplexMatrix d(1024);
  for (std::size_t k = 0; k < 1024; ++k) d(k, k) = e.values[k];
  CHECK(max_abs_diff(e.vectors * d * e.vectors.adjoint(), m) <= 1e-9 * m.frobenius_norm());
}

}
