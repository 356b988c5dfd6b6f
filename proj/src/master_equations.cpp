#include "spinstar/master_equations.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/errors.hpp"

namespace spinstar {

std::string to_string(ProjectorKind kind) { return kind == ProjectorKind::ThermalProduct ? "P1" : "P2"; }
std::string to_string(Equation eq) { return eq == Equation::NZ ? "NZ" : "TCL"; }

namespace {

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

void check_sign(int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("kernel sign must be +1 or -1");
}

}  // namespace

cplx omega_kernel(const ModelSpec& spec, int sign, double t, double t1) {
  check_sign(sign);
  const double tau = t - t1;
  const cplx z{0.5 * spec.A * tau, 0.5 * spec.beta};
  const double log_rest = std::log(static_cast<double>(spec.N)) + sign * 0.5 * spec.beta - std::log(2.0) -
                          spec.N * log_cosh(0.5 * spec.beta);
  const cplx phase = std::polar(1.0, (spec.omega0 - 0.5 * spec.A) * tau);
  const int n = spec.N - 1;
  if (n == 0) return std::exp(log_rest) * phase;
  if (std::abs(std::cos(z)) < 1e-3) return stable_cos_pow(n, z) * std::exp(log_rest) * phase;
  return std::exp(static_cast<double>(n) * log_cos(z) + log_rest) * phase;
}

std::vector<SpectralLine> omega_spectrum(const ModelSpec& spec, int sign, double drop_below) {
  check_sign(sign);
  const double log_scale = std::log(static_cast<double>(spec.N)) + sign * 0.5 * spec.beta - std::log(2.0) -
                           spec.N * log_cosh(0.5 * spec.beta);
  std::vector<SpectralLine> lines = cos_pow_spectrum(spec.N - 1, spec.beta, log_scale, drop_below);
  for (SpectralLine& l : lines) l.freq = spec.A * l.freq - 0.5 * spec.A;
  return lines;
}

cplx omega_tilde(HalfInt j, HalfInt m, int sign, const ModelSpec& spec, double t, double t1) {
  check_sign(sign);
  if (!is_projection_of(j, m)) return 0.0;
  const double jj = j.value() * (j.value() + 1.0), mv = m.value();
  const double tau = t - t1;
  if (sign > 0) return (jj - mv * (mv + 1.0)) * std::polar(1.0, (spec.A * mv + spec.omega0) * tau);
  return (jj - mv * (mv - 1.0)) * std::polar(1.0, (spec.A * (mv - 1.0) + spec.omega0) * tau);
}

double SectorState::total_trace() const {
  double s = 0.0;
  for (const ComplexMatrix& b : blocks) s += b.trace().real();
  return s;
}

std::size_t SectorState::find(HalfInt j, HalfInt m) const {
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i].j == j && keys[i].m == m) return i;
  return keys.size();
}

SectorState initial_sectors(const ModelSpec& spec, const DensityMatrix& rho0, double relative_floor) {
  spec.validate();
  if (rho0.j1() != spec.j1) throw ConfigError("initial state spin does not match j1");
  SectorState st;
  st.spec = spec;
  // A ladder's largest weight sits at its lowest or highest m.
  double log_max = -INFINITY;
  for (HalfInt j : bath_spins(spec.N))
    log_max = std::max({log_max, log_sector_weight(spec.N, j, j, spec.beta), log_sector_weight(spec.N, j, -j, spec.beta)});
  const double cut = relative_floor > 0.0 ? log_max + std::log(relative_floor) : -INFINITY;
  for (HalfInt j : bath_spins(spec.N)) {
    const double top = std::max(log_sector_weight(spec.N, j, j, spec.beta), log_sector_weight(spec.N, j, -j, spec.beta));
    const bool keep = top >= cut;
    for (HalfInt m = j; m >= -j; m -= HalfInt(1)) {
      const double w = std::exp(log_sector_weight(spec.N, j, m, spec.beta));
      if (!keep) {
        st.dropped_weight += w;
        continue;
      }
      st.keys.push_back({j, m});
      st.blocks.push_back(rho0.matrix() * cplx{w});
    }
  }
  return st;
}

ComplexMatrix assemble_reduced(const SectorState& state) {
  ComplexMatrix out(static_cast<std::size_t>(state.spec.dim()));
  for (const ComplexMatrix& b : state.blocks) out += b;
  return out;
}

namespace {

// Operator entry amp * exp(i (ft t + fs s)) |r><c|.
struct Entry {
  std::size_t r, c;
  cplx amp;
  double ft, fs;
};
using Op = std::vector<Entry>;

enum class When { T, S };

// s = exp(i omega0 t) S+ exp(-i A S_z t) and its adjoint.
Op raising(const ModelSpec& spec, When when, bool adjoint, bool with_detuning = true) {
  Op op;
  const std::size_t k = static_cast<std::size_t>(spec.dim());
  const double jj = spec.j1.value() * (spec.j1.value() + 1.0);
  for (std::size_t i = 1; i < k; ++i) {
    const double m = projection_at(spec.j1, i).value();
    const double amp = std::sqrt(jj - m * (m + 1.0));
    double f = (with_detuning ? spec.omega0 : 0.0) - spec.A * m;
    Entry e{i - 1, i, amp, 0.0, 0.0};
    if (adjoint) {
      std::swap(e.r, e.c);
      f = -f;
    }
    (when == When::T ? e.ft : e.fs) = f;
    op.push_back(e);
  }
  return op;
}

Op identity_op(std::size_t k) {
  Op op;
  for (std::size_t i = 0; i < k; ++i) op.push_back({i, i, 1.0, 0.0, 0.0});
  return op;
}

Op mul(const Op& a, const Op& b) {
  Op out;
  for (const Entry& x : a)
    for (const Entry& y : b)
      if (x.c == y.r) out.push_back({x.r, y.c, x.amp * y.amp, x.ft + y.ft, x.fs + y.fs});
  return out;
}

std::vector<SpectralLine> conj_lines(std::vector<SpectralLine> lines) {
  for (SpectralLine& l : lines) l.freq = -l.freq;
  return lines;
}

// Adds pref * K(t - s) * L rho_in(s) R to d/dt rho_out(t); index maps
// return SIZE_MAX for pruned elements. Kernel weights are real here.
template <class OutMap, class InMap>
void add_terms(SeparableGenerator& gen, cplx pref, const Op& L, const Op& R, const std::vector<SpectralLine>& kernel,
               OutMap out_index, InMap in_index) {
  for (const Entry& l : L)
    for (const Entry& r : R) {
      const std::size_t out = out_index(l.r, r.c), in = in_index(l.c, r.r);
      if (out == SIZE_MAX || in == SIZE_MAX) continue;
      for (const SpectralLine& line : kernel)
        gen.add({out, in, pref * l.amp * r.amp * line.weight, l.ft + r.ft + line.freq, l.fs + r.fs - line.freq});
    }
}

}  // namespace

SeparableGenerator thermal_generator(const ModelSpec& spec, double drop_below) {
  spec.validate();
  const std::size_t k = static_cast<std::size_t>(spec.dim());
  const Op s1 = raising(spec, When::T, false), s2 = raising(spec, When::T, true);
  const Op s1p = raising(spec, When::S, false), s2p = raising(spec, When::S, true);
  const Op I = identity_op(k);
  const auto plus = omega_spectrum(spec, +1, drop_below), minus = omega_spectrum(spec, -1, drop_below);
  const auto plus_c = conj_lines(plus), minus_c = conj_lines(minus);
  const cplx g = -0.25 * spec.A * spec.A;
  auto idx = [k](std::size_t r, std::size_t c) { return r * k + c; };

  SeparableGenerator gen(k * k);
  add_terms(gen, g, mul(s1, s2p), I, plus, idx, idx);
  add_terms(gen, g, mul(s2, s1p), I, minus_c, idx, idx);
  add_terms(gen, -g, s1, s2p, minus, idx, idx);
  add_terms(gen, -g, s2, s1p, plus_c, idx, idx);
  add_terms(gen, -g, s2p, s1, plus, idx, idx);
  add_terms(gen, -g, s1p, s2, minus_c, idx, idx);
  add_terms(gen, g, I, mul(s2p, s1), minus, idx, idx);
  add_terms(gen, g, I, mul(s1p, s2), plus_c, idx, idx);
  gen.compress();
  return gen;
}

SeparableGenerator correlated_generator(const SectorState& state, const std::vector<int>& coherence_orders,
                                        SectorLayout& layout) {
  const ModelSpec& spec = state.spec;
  const std::size_t k = static_cast<std::size_t>(spec.dim());
  const std::set<int> orders(coherence_orders.begin(), coherence_orders.end());
  std::vector<std::size_t> index(state.keys.size() * k * k, SIZE_MAX);
  layout.slots.clear();
  for (std::size_t sct = 0; sct < state.keys.size(); ++sct)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        if (orders.count(static_cast<int>(a) - static_cast<int>(b))) {
          index[(sct * k + a) * k + b] = layout.slots.size();
          layout.slots.push_back({sct, a, b});
        }

  const Op s1 = raising(spec, When::T, false), s2 = raising(spec, When::T, true);
  const Op s1p = raising(spec, When::S, false), s2p = raising(spec, When::S, true);
  const Op I = identity_op(k);
  const cplx g = -0.25 * spec.A * spec.A;
  const Op s1s2p = mul(s1, s2p), s2s1p = mul(s2, s1p), s2ps1 = mul(s2p, s1), s1ps2 = mul(s1p, s2);

  SeparableGenerator gen(layout.slots.size());
  for (std::size_t sct = 0; sct < state.keys.size(); ++sct) {
    const auto [j, M] = state.keys[sct];
    const double jj = j.value() * (j.value() + 1.0), m = M.value();
    const std::vector<SpectralLine> plus{{jj - m * (m + 1.0), spec.A * m}};
    const std::vector<SpectralLine> minus{{jj - m * (m - 1.0), spec.A * (m - 1.0)}};
    const auto plus_c = conj_lines(plus), minus_c = conj_lines(minus);
    auto at = [&](std::size_t sector) {
      return [&, sector](std::size_t r, std::size_t c) {
        return sector == state.keys.size() ? SIZE_MAX : index[(sector * k + r) * k + c];
      };
    };
    const std::size_t up = j >= M + HalfInt(1) ? state.find(j, M + HalfInt(1)) : state.keys.size();
    const std::size_t down = -j <= M - HalfInt(1) ? state.find(j, M - HalfInt(1)) : state.keys.size();
    add_terms(gen, g, s1s2p, I, plus, at(sct), at(sct));
    add_terms(gen, g, s2s1p, I, minus_c, at(sct), at(sct));
    add_terms(gen, -g, s1, s2p, plus, at(sct), at(up));
    add_terms(gen, -g, s2, s1p, minus_c, at(sct), at(down));
    add_terms(gen, -g, s2p, s1, minus, at(sct), at(down));
    add_terms(gen, -g, s1p, s2, plus_c, at(sct), at(up));
    add_terms(gen, g, I, s2ps1, minus, at(sct), at(sct));
    add_terms(gen, g, I, s1ps2, plus_c, at(sct), at(sct));
  }
  gen.compress();
  return gen;
}

KernelFunction thermal_kernel_direct(const ModelSpec& spec) {
  spec.validate();
  const std::size_t k = static_cast<std::size_t>(spec.dim());
  const ComplexMatrix Sp = spin_plus(spec.j1), Sz = spin_z(spec.j1);
  auto s_at = [=](double t) {
    ComplexMatrix s = Sp;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t r = 0; r < k; ++r) s(r, c) *= std::polar(1.0, -spec.A * Sz(c, c).real() * t);
    return s;
  };
  return [=](double t, double s, const StateVector& ys, StateVector& out) {
    ComplexMatrix rho(k);
    std::copy(ys.begin(), ys.end(), rho.data().begin());
    const ComplexMatrix s1 = s_at(t), s2 = s1.adjoint(), s1p = s_at(s), s2p = s1p.adjoint();
    const cplx kp = omega_kernel(spec, +1, t, s), km = omega_kernel(spec, -1, t, s);
    ComplexMatrix d = s1 * s2p * rho * kp + s2 * s1p * rho * std::conj(km) - s1 * rho * s2p * km -
                      s2 * rho * s1p * std::conj(kp) - s2p * rho * s1 * kp - s1p * rho * s2 * std::conj(km) +
                      rho * s2p * s1 * km + rho * s1p * s2 * std::conj(kp);
    const cplx g = -0.25 * spec.A * spec.A;
    for (std::size_t i = 0; i < k * k; ++i) out[i] += g * d.data()[i];
  };
}

ComplexMatrix back_transform(const ModelSpec& spec, const ComplexMatrix& rho, double t) {
  const std::size_t k = rho.rows();
  ComplexMatrix out = rho;
  const double lc = log_cosh(0.5 * spec.beta);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double q = static_cast<double>(b) - static_cast<double>(a);  // m_a - m_b
      const cplx z{0.5 * spec.A * q * t, -0.5 * spec.beta};
      const cplx dress = std::exp(static_cast<double>(spec.N) * (log_cos(z) - lc));
      out(a, b) *= std::polar(1.0, -spec.omega0 * q * t) * dress;
    }
  return out;
}

SectorState back_transform(const SectorState& in, double t) {
  SectorState out = in;
  const ModelSpec& spec = in.spec;
  for (std::size_t s = 0; s < in.keys.size(); ++s) {
    const double w = spec.omega0 + spec.A * in.keys[s].m.value();
    ComplexMatrix& blk = out.blocks[s];
    for (std::size_t a = 0; a < blk.rows(); ++a)
      for (std::size_t b = 0; b < blk.cols(); ++b)
        if (a != b) blk(a, b) *= std::polar(1.0, -w * (static_cast<double>(b) - static_cast<double>(a)) * t);
  }
  return out;
}

TimeSeries back_transform(ProjectorKind projector, const TimeSeries& interaction) {
  if (projector != ProjectorKind::ThermalProduct)
    throw ConfigError("the correlated back-transform needs sector states, not reduced matrices");
  TimeSeries out = interaction;
  for (std::size_t i = 0; i < out.times.size(); ++i)
    out.values[i] = back_transform(interaction.model, interaction.values[i], interaction.times[i]);
  out.meta["picture"] = "schrodinger";
  return out;
}

namespace {

struct Diverged {
  double t;
};

void integrate(Equation eq, const SeparableGenerator& gen, StateVector y0, const GridSpec& grid,
               const MemoryOptions& mo, const Observer& observe) {
  if (eq == Equation::NZ)
    integrate_memory(gen, std::move(y0), grid, mo, observe);
  else
    integrate_time_local(gen, std::move(y0), grid, mo, observe);
}

MemoryOptions memory_options(const ModelSpec& spec, const SolverOptions& o) {
  return {o.internal_step(spec), o.tolerance, o.max_iterations};
}

std::vector<int> coherence_orders(const SectorState& st) {
  std::set<int> q;
  for (const ComplexMatrix& b : st.blocks)
    for (std::size_t a = 0; a < b.rows(); ++a)
      for (std::size_t c = 0; c < b.cols(); ++c)
        if (b(a, c) != cplx{}) q.insert(static_cast<int>(a) - static_cast<int>(c));
  return {q.begin(), q.end()};
}

void check_ladders(const SectorState& st) {
  for (const SectorKey& key : st.keys)
    for (HalfInt m = key.j; m >= -key.j; m -= HalfInt(1))
      if (st.find(key.j, m) == st.keys.size())
        throw ConfigError("sector ladder j=" + key.j.str() + " is incomplete");
}

}  // namespace

namespace {

// Populations of one j with the same total projection (central + bath) only
// exchange weight among themselves, so their sum is conserved. Integrating
// the sum and the differences to the first member keeps round-off from
// being amplified through modes that decay to ~e^-90 and regrow.
struct PopulationBasis {
  SeparableGenerator::SparseRows to_new, to_old;
};

PopulationBasis population_basis(const SectorState& state, const SectorLayout& layout) {
  const std::size_t n = layout.slots.size();
  const int twice_j1 = state.spec.j1.twice();
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sl = layout.slots[i];
    if (sl.row != sl.col) continue;
    const SectorKey& k = state.keys[sl.sector];
    const int total = k.m.twice() + twice_j1 - 2 * static_cast<int>(sl.row);
    groups[{k.j.twice(), total}].push_back(i);
  }
  PopulationBasis pb;
  pb.to_new.assign(n, {});
  pb.to_old.assign(n, {});
  std::vector<bool> grouped(n, false);
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    const std::size_t first = members.front();
    const double inv = 1.0 / static_cast<double>(members.size());
    // w_first = sum y, w_i = y_i - y_first
    for (std::size_t i : members) pb.to_new[first].push_back({i, 1.0});
    pb.to_old[first].push_back({first, inv});
    for (std::size_t r = 1; r < members.size(); ++r) {
      const std::size_t i = members[r];
      pb.to_new[i] = {{i, 1.0}, {first, -1.0}};
      pb.to_old[first].push_back({i, -inv});
    }
    for (std::size_t r = 1; r < members.size(); ++r) {
      const std::size_t i = members[r];
      pb.to_old[i] = pb.to_old[first];
      pb.to_old[i].push_back({i, 1.0});
    }
    for (std::size_t i : members) grouped[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!grouped[i]) {
      pb.to_new[i] = {{i, 1.0}};
      pb.to_old[i] = {{i, 1.0}};
    }
  return pb;
}

StateVector apply_rows(const SeparableGenerator::SparseRows& rows, const StateVector& v) {
  StateVector out(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    std::complex<double> acc{};
    for (const auto& [i, c] : rows[a]) acc += c * v[i];
    out[a] = acc;
  }
  return out;
}

}  // namespace

void solve_sectors(Equation equation, const SectorState& initial, const GridSpec& grid, const SolverOptions& options,
                   const std::function<void(double, const SectorState&)>& observe) {
  check_ladders(initial);
  SectorLayout layout;
  const SeparableGenerator raw = correlated_generator(initial, coherence_orders(initial), layout);
  const PopulationBasis pb = population_basis(initial, layout);
  const SeparableGenerator gen = raw.change_basis(pb.to_new, pb.to_old);
  StateVector y0(layout.slots.size());
  for (std::size_t i = 0; i < y0.size(); ++i) {
    const auto& sl = layout.slots[i];
    y0[i] = initial.blocks[sl.sector](sl.row, sl.col);
  }
  SectorState work = initial;
  for (ComplexMatrix& b : work.blocks) b *= 0.0;
  integrate(equation, gen, apply_rows(pb.to_new, y0), grid, memory_options(initial.spec, options),
            [&](double t, const StateVector& w) {
              const StateVector y = apply_rows(pb.to_old, w);
              for (std::size_t i = 0; i < y.size(); ++i) {
                const auto& sl = layout.slots[i];
                work.blocks[sl.sector](sl.row, sl.col) = y[i];
              }
              observe(t, work);
            });
}

TimeSeries master_solve(const ModelSpec& spec, ProjectorKind projector, Equation equation, const DensityMatrix& rho0,
                        const GridSpec& grid, const SolverOptions& options) {
  spec.validate();
  if (rho0.j1() != spec.j1) throw ConfigError("initial state spin does not match j1");
  rho0.validate(1e-10);
  grid.validate();
  TimeSeries ts;
  ts.method = to_string(equation) + "_" + to_string(projector);
  ts.model = spec;
  ts.meta["equation"] = to_string(equation);
  ts.meta["projector"] = to_string(projector);
  ts.meta["picture"] = options.interaction_picture ? "interaction" : "schrodinger";
  {
    std::ostringstream os;
    os.precision(17);
    os << options.internal_step(spec);
    ts.meta["internal_step"] = os.str();
  }
  const std::size_t k = static_cast<std::size_t>(spec.dim());
  auto record = [&](double t, ComplexMatrix rho) {
    const double defect = std::abs(rho.trace() - 1.0);
    if (!rho.all_finite() || !(defect <= options.divergence_tolerance) ||
        !(rho.max_abs() <= options.magnitude_bound))
      throw Diverged{t};
    ts.times.push_back(t);
    ts.values.push_back(std::move(rho));
  };
  try {
    if (projector == ProjectorKind::ThermalProduct) {
      const SeparableGenerator gen = thermal_generator(spec);
      StateVector y0(rho0.matrix().data().begin(), rho0.matrix().data().end());
      integrate(equation, gen, std::move(y0), grid, memory_options(spec, options), [&](double t, const StateVector& y) {
        ComplexMatrix rho(k);
        std::copy(y.begin(), y.end(), rho.data().begin());
        record(t, options.interaction_picture ? rho : back_transform(spec, rho, t));
      });
      ts.meta["terms"] = std::to_string(gen.terms().size());
      return ts;
    }

    const SectorState init = initial_sectors(spec, rho0, options.sector_floor);
    ts.meta["dropped_weight"] = std::to_string(init.dropped_weight);
    ts.meta["sectors"] = std::to_string(init.keys.size());
    solve_sectors(equation, init, grid, options, [&](double t, const SectorState& st) {
      record(t, assemble_reduced(options.interaction_picture ? st : back_transform(st, t)));
    });
  } catch (const Diverged& d) {
    if (!options.truncate_on_divergence)
      throw NumericalError(ts.method + " diverged at t=" + std::to_string(d.t) +
                           ": trace or magnitude bound violated (round-off amplification)");
    ts.meta["diverged_at"] = std::to_string(d.t);
  } catch (const NumericalError&) {
    if (!options.truncate_on_divergence) throw;
    ts.meta["diverged_at"] = ts.times.empty() ? "0" : std::to_string(ts.times.back());
  }
  return ts;
}

TimeSeries nz_solve(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, const GridSpec& grid,
                    const SolverOptions& options) {
  return master_solve(spec, projector, Equation::NZ, rho0, grid, options);
}

TimeSeries tcl_solve(const ModelSpec& spec, ProjectorKind projector, const DensityMatrix& rho0, const GridSpec& grid,
                     const SolverOptions& options) {
  return master_solve(spec, projector, Equation::TCL, rho0, grid, options);
}

}  // namespace spinstar
