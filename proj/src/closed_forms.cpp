#include "spinstar/closed_forms.hpp"

#include <cmath>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/special.hpp"

namespace spinstar {

void J1BlockParams::validate() const {
  if (!is_projection_of(j, m)) throw ConfigError("block centre m must be a projection of j");
  if (!(A > 0.0)) throw ConfigError("coupling A must be positive");
  if (Cblock < 0.0) throw ConfigError("block constant must be non-negative");
}

double J1BlockParams::J() const {
  const double jv = j.value(), mv = m.value();
  return std::sqrt((jv - mv) * (jv - mv + 1.0) * (jv + mv) * (jv + mv + 1.0));
}

double J1BlockParams::K() const {
  const double jv = j.value(), mv = m.value();
  return 2.0 * jv * (jv + 1.0) - mv * mv + 1.0;
}

BlockPopulations nz2_block(const J1BlockParams& p, double x0, double y0, double z0, double t) {
  p.validate();
  const double jv = p.j.value(), mv = p.m.value(), A2 = p.A * p.A;
  const double C = x0 + y0 + z0;
  const double P1 = (jv - mv + 1.0) * (jv + mv), P2 = (jv + mv + 1.0) * (jv - mv);
  const double ax = A2 * P1, az = A2 * P2;
  const double w1 = A2 * (mv - 1.0) * (mv - 1.0), w2 = A2 * (mv + 1.0) * (mv + 1.0);
  const double K = p.K();
  // x' = ax int cos(A(m-1)(t-s)) (C - 2x - z), z' = az int cos(A(m+1)(t-s)) (C - x - 2z).
  auto single = [&](double a, double w, double u0, double other) {
    // u' = a int cos(..)(C - other - 2u): u = c0 + (u0 - c0) cos(A sqrt(K) t)
    const double c0 = (u0 * w + a * (C - other)) / (A2 * K);
    return c0 + (u0 - c0) * std::cos(p.A * std::sqrt(K) * t);
  };
  if (P1 == 0.0 && P2 == 0.0) return {x0, y0, z0};
  if (P1 == 0.0) {
    const double z = single(az, w2, z0, x0);
    return {x0, C - x0 - z, z};
  }
  if (P2 == 0.0) {
    const double x = single(ax, w1, x0, z0);
    return {x, C - x - z0, z0};
  }
  // With u = p^2: D(u) = (u + A^2 K)^2 - A^4 J^2, roots u = -A^2 (K -+ J).
  const double J = p.J();
  const double up = -A2 * (K - J), um = -A2 * (K + J);
  auto D = [&](double u) { return (u + A2 * K) * (u + A2 * K) - A2 * A2 * J * J; };
  auto dD = [&](double u) { return 2.0 * (u + A2 * K); };
  auto Nx = [&](double u) { return (x0 * (u + w1) + ax * C) * (u + w2 + 2.0 * az) - ax * (z0 * (u + w2) + az * C); };
  auto Nz = [&](double u) { return (z0 * (u + w2) + az * C) * (u + w1 + 2.0 * ax) - az * (x0 * (u + w1) + ax * C); };
  auto invert = [&](auto&& Nf) {
    double v = Nf(0.0) / D(0.0);
    for (double u : {up, um}) v += Nf(u) / (u * dD(u)) * std::cos(std::sqrt(-u) * t);
    return v;
  };
  const double x = invert(Nx), z = invert(Nz);
  return {x, C - x - z, z};
}

double nz2_population(const J1BlockParams& p, double t) { return nz2_block(p, p.Cblock, 0.0, 0.0, t).x; }

std::pair<double, double> tcl_j1_largem(const J1BlockParams& p, double x0, double z0, double t) {
  p.validate();
  if (p.m.twice() == 0) throw ConfigError("large-m approximation undefined at m = 0");
  const double jv = p.j.value(), mv = p.m.value(), C = p.Cblock;
  const double G = (jv * jv - mv * mv) * (1.0 - std::cos(p.A * mv * t)) / (mv * mv);
  const double u0 = x0 - z0, v0 = x0 + z0;
  const double u = u0 * std::exp(-G);
  const double v = 2.0 * C / 3.0 + (v0 - 2.0 * C / 3.0) * std::exp(-3.0 * G);
  return {0.5 * (u + v), 0.5 * (v - u)};
}

std::pair<double, double> tcl_j1_largem(const J1BlockParams& p, double t) { return tcl_j1_largem(p, p.Cblock, 0.0, t); }

namespace {

void check_appendix(const ModelSpec& spec, const DensityMatrix& rho0) {
  spec.validate();
  if (spec.j1 != kHalf) throw ConfigError("appendix solutions need j1 = 1/2");
  if (spec.beta != 0.0) throw ConfigError("appendix solutions need beta = 0");
  if (rho0.j1() != kHalf) throw ConfigError("initial state must be a spin-1/2 state");
}

// K+(m) = omega0 + A (m + 1/2), b^2(j, m) = (j - m)(j + m + 1).
double k_plus(const ModelSpec& s, double m) { return s.omega0 + s.A * (m + 0.5); }
double b2(double j, double m) { return (j - m) * (j + m + 1.0); }

// Amplitude to stay in the upper level of block {|up, m>, |down, m+1>},
// without the common phase exp(i A t / 4).
cplx stay_up(const ModelSpec& s, double j, double m, double t) {
  const double d = 0.5 * k_plus(s, m), g2 = 0.25 * s.A * s.A * b2(j, m);
  const double mu = std::sqrt(d * d + g2);
  if (mu == 0.0) return 1.0;
  return {std::cos(mu * t), -d / mu * std::sin(mu * t)};
}

double transfer_probability(const ModelSpec& s, double j, double m, double t) {
  const double d = 0.5 * k_plus(s, m), g2 = 0.25 * s.A * s.A * b2(j, m);
  const double mu2 = d * d + g2;
  if (g2 == 0.0) return 0.0;
  const double sn = std::sin(std::sqrt(mu2) * t);
  return g2 / mu2 * sn * sn;
}

// integral_0^t integral_0^t1 cos^{N-1}(A tau/2) exp(i omega0 tau)
cplx cos_pow_double_integral(const ModelSpec& s, double t) {
  cplx sum;
  for (const SpectralLine& l : cos_pow_spectrum(s.N - 1, 0.0)) sum += l.weight * double_phase_integral(s.A * l.freq + s.omega0, t);
  return sum;
}

}  // namespace

ComplexMatrix appendix_exact(const ModelSpec& spec, const DensityMatrix& rho0, double t) {
  check_appendix(spec, rho0);
  const double up0 = rho0.matrix()(0, 0).real(), down0 = rho0.matrix()(1, 1).real();
  const cplx coh0 = rho0.matrix()(0, 1);
  double up = 0.0;
  cplx coh;
  for (HalfInt jh : bath_spins(spec.N)) {
    const double w = std::exp(log_degeneracy(spec.N, jh) - spec.N * std::log(2.0));
    const double j = jh.value();
    for (HalfInt mh = -jh; mh <= jh; mh += HalfInt(1)) {
      const double m = mh.value();
      up += w * (up0 * (1.0 - transfer_probability(spec, j, m, t)) + down0 * transfer_probability(spec, j, m - 1.0, t));
      // |down, m> lives in the block of |up, m-1>.
      const cplx stay_down = std::conj(stay_up(spec, j, m - 1.0, t));
      coh += w * stay_up(spec, j, m, t) * std::conj(stay_down);
    }
  }
  ComplexMatrix out(2);
  out(0, 0) = up;
  out(1, 1) = 1.0 - up;
  out(0, 1) = coh0 * coh;
  out(1, 0) = std::conj(out(0, 1));
  return out;
}

double appendix_integrated_f(const ModelSpec& spec, double t) {
  return spec.N * cos_pow_double_integral(spec, t).real();
}

SectorState appendix_tcl_sectors(const ModelSpec& spec, const DensityMatrix& rho0, double t) {
  check_appendix(spec, rho0);
  SectorState st = initial_sectors(spec, rho0);
  const double A2 = spec.A * spec.A;
  SectorState out = st;
  for (std::size_t i = 0; i < st.keys.size(); ++i) {
    const double j = st.keys[i].j.value(), m = st.keys[i].m.value();
    // Population pair (up in m, down in m+1) relaxes towards its mean.
    const double x0 = st.blocks[i](0, 0).real();
    const std::size_t partner = st.find(st.keys[i].j, st.keys[i].m + HalfInt(1));
    if (partner < st.keys.size()) {
      const double y0 = st.blocks[partner](1, 1).real();
      const double kp = k_plus(spec, m);
      const double B = kp == 0.0 ? 0.5 * t * t : (1.0 - std::cos(kp * t)) / (kp * kp);
      const double decay = std::exp(-A2 * b2(j, m) * B);
      const double mean = 0.5 * (x0 + y0), half = 0.5 * (x0 - y0) * decay;
      out.blocks[i](0, 0) = mean + half;
      out.blocks[partner](1, 1) = mean - half;
    }
    const double kp = k_plus(spec, m), km = -k_plus(spec, m - 1.0);
    const cplx expo = -0.25 * A2 * (b2(j, m) * double_phase_integral(kp, t) + b2(j, -m) * double_phase_integral(-km, t));
    const cplx c = st.blocks[i](0, 1) * std::exp(expo);
    out.blocks[i](0, 1) = c;
    out.blocks[i](1, 0) = std::conj(c);
  }
  return back_transform(out, t);
}

ComplexMatrix appendix_tcl(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, double t) {
  check_appendix(spec, rho0);
  if (projector == ProjectorKind::Correlated) return assemble_reduced(appendix_tcl_sectors(spec, rho0, t));
  const double A2 = spec.A * spec.A;
  const ComplexMatrix& r0 = rho0.matrix();
  const double up = 0.5 + (r0(0, 0).real() - 0.5) * std::exp(-0.5 * A2 * appendix_integrated_f(spec, t));
  ComplexMatrix out(2);
  out(0, 0) = up;
  out(1, 1) = 1.0 - up;
  out(0, 1) = r0(0, 1) * std::exp(-0.25 * A2 * spec.N * cos_pow_double_integral(spec, t));
  out(1, 0) = std::conj(out(0, 1));
  return back_transform(spec, out, t);
}

}  // namespace spinstar
