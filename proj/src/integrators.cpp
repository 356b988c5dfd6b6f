#include "spinstar/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <tuple>

#include "spinstar/errors.hpp"
#include "spinstar/special.hpp"

namespace spinstar {

void GridSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("grid step must be positive");
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || t_end < t_start)
    throw ConfigError("grid end must not precede its start");
  const double n = (t_end - t_start) / step;
  if (n + 1.0 > static_cast<double>(max_steps))
    throw GuardError("grid has " + std::to_string(static_cast<long long>(n + 1.0)) + " points, limit " +
                     std::to_string(max_steps));
}

std::size_t GridSpec::count() const {
  validate();
  return static_cast<std::size_t>(std::floor((t_end - t_start) / step + 1e-9)) + 1;
}

std::vector<double> GridSpec::times() const {
  std::vector<double> out(count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
  return out;
}

int substeps_for(const GridSpec& grid, double h) {
  if (!(h > 0.0)) throw ConfigError("internal step must be positive");
  const double ratio = grid.step / h;
  return std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
}

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

void check_finite(const StateVector& y, double t) {
  for (const cplx& v : y)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("non-finite state at t=" + std::to_string(t));
}

void axpy(StateVector& y, cplx a, const StateVector& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

void rk4_solve(const RhsFunction& rhs, StateVector y, const GridSpec& grid, int substeps, const Observer& observe) {
  grid.validate();
  if (substeps < 1) throw ConfigError("substeps must be at least 1");
  const std::size_t n = grid.count();
  const double h = grid.step / substeps;
  const std::size_t dim = y.size();
  StateVector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  auto eval = [&](double t, const StateVector& at, StateVector& k) {
    std::fill(k.begin(), k.end(), cplx{});
    rhs(t, at, k);
  };
  observe(grid.at(0), y);
  for (std::size_t i = 1; i < n; ++i) {
    const double t0 = grid.at(i - 1);
    for (int s = 0; s < substeps; ++s) {
      const double t = t0 + s * h;
      eval(t, y, k1);
      tmp = y;
      axpy(tmp, 0.5 * h, k1);
      eval(t + 0.5 * h, tmp, k2);
      tmp = y;
      axpy(tmp, 0.5 * h, k2);
      eval(t + 0.5 * h, tmp, k3);
      tmp = y;
      axpy(tmp, h, k3);
      eval(t + h, tmp, k4);
      for (std::size_t d = 0; d < dim; ++d) y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    check_finite(y, grid.at(i));
    observe(grid.at(i), y);
  }
}

Trajectory rk4_solve(const RhsFunction& rhs, StateVector y0, const GridSpec& grid, int substeps) {
  Trajectory out;
  rk4_solve(rhs, std::move(y0), grid, substeps, [&](double t, const StateVector& y) {
    out.times.push_back(t);
    out.states.push_back(y);
  });
  return out;
}

Trajectory volterra_solve(const KernelFunction& kernel, StateVector y0, const GridSpec& grid,
                          const VolterraOptions& options) {
  grid.validate();
  if (options.substeps < 1) throw ConfigError("substeps must be at least 1");
  const std::size_t outputs = grid.count();
  const std::size_t steps = (outputs - 1) * static_cast<std::size_t>(options.substeps);
  const double h = grid.step / options.substeps;
  const std::size_t dim = y0.size();

  std::vector<StateVector> ys;
  ys.reserve(steps + 1);
  ys.push_back(std::move(y0));

  Trajectory out;
  out.times.push_back(grid.t_start);
  out.states.push_back(ys.front());

  auto t_of = [&](std::size_t i) { return grid.t_start + static_cast<double>(i) * h; };

  // F(t_n) = h [K_n0 y0 / 2 + sum_{i<n} K_ni y_i + K_nn y_n / 2], without the y_n term.
  auto history = [&](std::size_t n) {
    StateVector f(dim);
    if (n == 0) return f;
    StateVector part(dim);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(part.begin(), part.end(), cplx{});
      kernel(t_of(n), t_of(i), ys[i], part);
      axpy(f, i == 0 ? 0.5 * h : h, part);
    }
    return f;
  };

  StateVector f_prev(dim), tmp(dim);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t1 = t_of(n + 1);
    const StateVector hist = history(n + 1);
    StateVector z = ys[n];
    for (std::size_t d = 0; d < dim; ++d) z[d] += h * f_prev[d];
    StateVector f_next;
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      f_next = hist;
      std::fill(tmp.begin(), tmp.end(), cplx{});
      kernel(t1, t1, z, tmp);
      axpy(f_next, 0.5 * h, tmp);
      double change = 0.0, scale = 1.0;
      StateVector znew = ys[n];
      for (std::size_t d = 0; d < dim; ++d) {
        znew[d] += 0.5 * h * (f_prev[d] + f_next[d]);
        change = std::max(change, std::abs(znew[d] - z[d]));
        scale = std::max(scale, std::abs(znew[d]));
      }
      z = std::move(znew);
      if (change <= options.tolerance * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("Volterra corrector did not converge at t=" + std::to_string(t1));
    check_finite(z, t1);
    f_prev = std::move(f_next);
    ys.push_back(std::move(z));
    if ((n + 1) % static_cast<std::size_t>(options.substeps) == 0) {
      out.times.push_back(grid.at((n + 1) / static_cast<std::size_t>(options.substeps)));
      out.states.push_back(ys.back());
    }
  }
  return out;
}

void SeparableGenerator::add(const SeparableTerm& term) {
  if (term.out >= dim_ || term.in >= dim_) throw std::out_of_range("separable term index outside the state");
  if (term.coef != cplx{}) terms_.push_back(term);
}

namespace {

// Frequencies are sums of a few model constants, so merging uses a
// rounded key rather than exact equality.
long long freq_key(double f) { return std::llround(f * 1e9); }

}  // namespace

void SeparableGenerator::compress() {
  std::map<std::tuple<std::size_t, std::size_t, long long, long long>, std::size_t> index;
  std::vector<SeparableTerm> merged;
  std::vector<double> scale;
  merged.reserve(terms_.size());
  for (const SeparableTerm& t : terms_) {
    const auto key = std::make_tuple(t.out, t.in, freq_key(t.lambda), freq_key(t.mu));
    auto [it, inserted] = index.try_emplace(key, merged.size());
    if (inserted) {
      merged.push_back(t);
      scale.push_back(std::abs(t.coef));
    } else {
      merged[it->second].coef += t.coef;
      scale[it->second] += std::abs(t.coef);
    }
  }
  // contributions that cancel up to rounding are dropped as exact zeros
  std::vector<SeparableTerm> kept;
  kept.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i)
    if (std::abs(merged[i].coef) > 1e-14 * scale[i]) kept.push_back(merged[i]);
  terms_ = std::move(kept);
}

SeparableGenerator SeparableGenerator::change_basis(const SparseRows& to_new, const SparseRows& to_old) const {
  if (to_new.size() != dim_ || to_old.size() != dim_) throw ConfigError("basis change has the wrong dimension");
  // columns of the forward map: old index -> (new index, value)
  SparseRows by_old(dim_);
  for (std::size_t a = 0; a < dim_; ++a)
    for (const auto& [i, v] : to_new[a]) by_old.at(i).push_back({a, v});
  SeparableGenerator out(dim_);
  for (const SeparableTerm& t : terms_)
    for (const auto& [a, va] : by_old[t.out])
      for (const auto& [b, vb] : to_old[t.in]) out.add({a, b, va * t.coef * vb, t.lambda, t.mu});
  out.compress();
  return out;
}

double SeparableGenerator::max_frequency() const {
  double f = 0.0;
  for (const SeparableTerm& t : terms_)
    f = std::max({f, std::abs(t.lambda), std::abs(t.mu), std::abs(t.lambda + t.mu)});
  return f;
}

namespace {

class FrequencyTable {
 public:
  std::size_t intern(double f) {
    auto [it, inserted] = index_.try_emplace(freq_key(f), values_.size());
    if (inserted) values_.push_back(f);
    return it->second;
  }
  void phases(double t, std::vector<cplx>& out) const {
    out.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::polar(1.0, values_[i] * t);
  }

 private:
  std::map<long long, std::size_t> index_;
  std::vector<double> values_;
};

// Quadrature on [0, 1] split into panels short enough for the phase.
struct PanelRule {
  std::vector<double> x, w;
};

PanelRule panel_rule(double max_phase) {
  std::vector<double> gx, gw;
  gauss_legendre01(12, gx, gw);
  const int panels = std::max(1, static_cast<int>(std::ceil(max_phase)));
  PanelRule r;
  for (int p = 0; p < panels; ++p)
    for (std::size_t k = 0; k < gx.size(); ++k) {
      r.x.push_back((p + gx[k]) / panels);
      r.w.push_back(gw[k] / panels);
    }
  return r;
}

// int_0^1 e^{i x a} (1-a) da and int_0^1 e^{i x a} a da.
std::pair<cplx, cplx> linear_weights(double x) {
  const PanelRule r = panel_rule(std::abs(x));
  cplx w0, w1;
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    const cplx e = std::polar(r.w[k], x * r.x[k]);
    w0 += e * (1.0 - r.x[k]);
    w1 += e * r.x[k];
  }
  return {w0, w1};
}

// int_0^1 da e^{i x a} int_0^a db e^{i y b} (1-b) and the same with b.
std::pair<cplx, cplx> triangle_weights(double x, double y) {
  const PanelRule outer = panel_rule(std::max(std::abs(x), std::abs(y)));
  std::vector<double> gx, gw;
  gauss_legendre01(12, gx, gw);
  const int inner_panels = std::max(1, static_cast<int>(std::ceil(std::abs(y))));
  cplx d0, d1;
  for (std::size_t k = 0; k < outer.x.size(); ++k) {
    const double a = outer.x[k];
    cplx g0, g1;
    for (int p = 0; p < inner_panels; ++p)
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double b = a * (p + gx[q]) / inner_panels;
        const cplx e = std::polar(a * gw[q] / inner_panels, y * b);
        g0 += e * (1.0 - b);
        g1 += e * b;
      }
    const cplx ea = std::polar(outer.w[k], x * a);
    d0 += ea * g0;
    d1 += ea * g1;
  }
  return {d0, d1};
}

cplx constant_weight(double x) { return phase_integral(x, 1.0); }

}  // namespace

void integrate_memory(const SeparableGenerator& gen, StateVector y, const GridSpec& grid,
                      const MemoryOptions& options, const Observer& observe) {
  grid.validate();
  if (grid.t_start != 0.0) throw ConfigError("master-equation grids must start at t=0");
  if (y.size() != gen.dim()) throw std::invalid_argument("state size does not match the generator");
  const int sub = substeps_for(grid, options.step);
  const double h = grid.step / sub;

  FrequencyTable freqs;
  struct Acc {
    std::size_t in, mu;
    cplx w0, w1;
  };
  struct Term {
    std::size_t out, in, acc, lam, sum;
    cplx coef, e, d0, d1;
  };
  std::vector<Acc> accs;
  std::map<std::pair<std::size_t, long long>, std::size_t> acc_index;
  std::map<std::pair<long long, long long>, std::tuple<cplx, cplx, cplx>> weight_cache;
  std::vector<Term> terms;
  terms.reserve(gen.terms().size());
  for (const SeparableTerm& st : gen.terms()) {
    auto [it, inserted] = acc_index.try_emplace({st.in, freq_key(st.mu)}, accs.size());
    if (inserted) {
      auto [w0, w1] = linear_weights(st.mu * h);
      accs.push_back({st.in, freqs.intern(st.mu), h * w0, h * w1});
    }
    auto [wit, fresh] = weight_cache.try_emplace({freq_key(st.lambda), freq_key(st.mu)});
    if (fresh) {
      auto [d0, d1] = triangle_weights(st.lambda * h, st.mu * h);
      wit->second = {h * constant_weight(st.lambda * h), h * h * d0, h * h * d1};
    }
    const auto& [e, d0, d1] = wit->second;
    terms.push_back({st.out, st.in, it->second, freqs.intern(st.lambda), freqs.intern(st.lambda + st.mu), st.coef, e,
                     d0, d1});
  }

  const std::size_t dim = y.size();
  std::vector<cplx> integral(accs.size());
  std::vector<cplx> phase;
  std::vector<cplx> implicit(terms.size());
  StateVector base(dim), z(dim), znew(dim);
  const std::size_t outputs = grid.count();
  observe(0.0, y);
  for (std::size_t o = 1; o < outputs; ++o) {
    for (int s = 0; s < sub; ++s) {
      const double t = grid.at(o - 1) + s * h;
      freqs.phases(t, phase);
      base = y;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const Term& tm = terms[k];
        base[tm.out] += tm.coef * (phase[tm.lam] * tm.e * integral[tm.acc] + phase[tm.sum] * tm.d0 * y[tm.in]);
        implicit[k] = tm.coef * phase[tm.sum] * tm.d1;
      }
      z = y;
      bool converged = false;
      for (int it = 0; it < options.max_iterations; ++it) {
        znew = base;
        for (std::size_t k = 0; k < terms.size(); ++k) znew[terms[k].out] += implicit[k] * z[terms[k].in];
        double change = 0.0, scale = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
          change = std::max(change, std::abs(znew[d] - z[d]));
          scale = std::max(scale, std::abs(znew[d]));
        }
        std::swap(z, znew);
        if (change <= options.tolerance * scale) {
          converged = true;
          break;
        }
      }
      if (!converged) throw NumericalError("memory corrector did not converge at t=" + std::to_string(t + h));
      for (std::size_t a = 0; a < accs.size(); ++a)
        integral[a] += phase[accs[a].mu] * (accs[a].w0 * y[accs[a].in] + accs[a].w1 * z[accs[a].in]);
      std::swap(y, z);
    }
    check_finite(y, grid.at(o));
    observe(grid.at(o), y);
  }
}

void integrate_time_local(const SeparableGenerator& gen, StateVector y, const GridSpec& grid,
                          const MemoryOptions& options, const Observer& observe) {
  grid.validate();
  if (grid.t_start != 0.0) throw ConfigError("master-equation grids must start at t=0");
  if (y.size() != gen.dim()) throw std::invalid_argument("state size does not match the generator");
  FrequencyTable lam_freqs;
  std::map<long long, std::size_t> mu_index;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_index;
  std::vector<double> mus;
  std::vector<std::size_t> pair_out;
  struct Term {
    std::size_t out, in, lam, mu, pair;
    cplx coef;
  };
  // Slots coupled only to themselves are carried as y(0) exp(phase) with
  // the phase accumulated by Simpson on the RK4 nodes. Their magnitude can
  // pass through ~e^-500 and come back, which the state vector itself
  // cannot represent.
  std::vector<bool> scalar(y.size(), true);
  for (const SeparableTerm& st : gen.terms())
    if (st.out != st.in) scalar[st.out] = scalar[st.in] = false;
  std::vector<Term> terms, self_terms;
  for (const SeparableTerm& st : gen.terms()) {
    auto [it, inserted] = mu_index.try_emplace(freq_key(st.mu), mus.size());
    if (inserted) mus.push_back(st.mu);
    auto [pit, fresh] = pair_index.try_emplace({st.out, st.in}, pair_out.size());
    if (fresh) pair_out.push_back(st.out);
    const Term term{st.out, st.in, lam_freqs.intern(st.lambda), it->second, pit->second, st.coef};
    (scalar[st.out] ? self_terms : terms).push_back(term);
  }
  std::vector<cplx> phase, phi(mus.size()), factor(terms.size()), pair_coef(pair_out.size());
  double cached_t = -1.0;
  auto refresh = [&](double t) {
    if (t == cached_t) return;
    lam_freqs.phases(t, phase);
    for (std::size_t i = 0; i < mus.size(); ++i) phi[i] = phase_integral(mus[i], t);
    for (std::size_t k = 0; k < terms.size(); ++k) factor[k] = terms[k].coef * phase[terms[k].lam] * phi[terms[k].mu];
    cached_t = t;
  };
  auto self_rate = [&](double t, StateVector& rate) {
    refresh(t);
    std::fill(rate.begin(), rate.end(), cplx{});
    for (const Term& k : self_terms) rate[k.out] += k.coef * phase[k.lam] * phi[k.mu];
  };
  // Gershgorin bound on the generator at time t (scalar slots included,
  // their phase quadrature wants the same resolution).
  StateVector self_now(y.size());
  std::vector<double> row(y.size());
  auto bound = [&](double t) {
    refresh(t);
    std::fill(pair_coef.begin(), pair_coef.end(), cplx{});
    for (std::size_t k = 0; k < terms.size(); ++k) pair_coef[terms[k].pair] += factor[k];
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t p = 0; p < pair_coef.size(); ++p) row[pair_out[p]] += std::abs(pair_coef[p]);
    if (!self_terms.empty()) {
      self_rate(t, self_now);
      for (std::size_t d = 0; d < row.size(); ++d) row[d] += std::abs(self_now[d]);
    }
    return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
  };

  const std::size_t dim = y.size();
  StateVector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const StateVector y_start = y;
  StateVector log_gain(dim), r0(dim), r1(dim), r2(dim);
  auto eval = [&](double t, const StateVector& at, StateVector& dy) {
    refresh(t);
    std::fill(dy.begin(), dy.end(), cplx{});
    for (std::size_t k = 0; k < terms.size(); ++k) dy[terms[k].out] += factor[k] * at[terms[k].in];
  };
  // RK4 is stable for h |lambda| below about 2.8 on both axes.
  constexpr double kStableProduct = 1.0;
  const std::size_t outputs = grid.count();
  observe(0.0, y);
  for (std::size_t o = 1; o < outputs; ++o) {
    const double t0 = grid.at(o - 1);
    const double rate = std::max(bound(t0), bound(grid.at(o)));
    double h = options.step;
    if (rate * h > kStableProduct) h = kStableProduct / rate;
    const int sub = substeps_for(grid, h);
    const double hs = grid.step / sub;
    for (int s = 0; s < sub; ++s) {
      const double t = t0 + s * hs;
      eval(t, y, k1);
      tmp = y;
      axpy(tmp, 0.5 * hs, k1);
      eval(t + 0.5 * hs, tmp, k2);
      tmp = y;
      axpy(tmp, 0.5 * hs, k2);
      eval(t + 0.5 * hs, tmp, k3);
      tmp = y;
      axpy(tmp, hs, k3);
      eval(t + hs, tmp, k4);
      for (std::size_t d = 0; d < dim; ++d) y[d] += hs / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
      if (!self_terms.empty()) {
        self_rate(t, r0);
        self_rate(t + 0.5 * hs, r1);
        self_rate(t + hs, r2);
        for (std::size_t d = 0; d < dim; ++d) {
          if (!scalar[d]) continue;
          log_gain[d] += hs / 6.0 * (r0[d] + 4.0 * r1[d] + r2[d]);
          y[d] = y_start[d] == cplx{} ? cplx{} : y_start[d] * std::exp(log_gain[d]);
        }
      }
    }
    check_finite(y, grid.at(o));
    observe(grid.at(o), y);
  }
}

}  // namespace spinstar
