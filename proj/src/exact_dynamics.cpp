#include "spinstar/exact_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/errors.hpp"

namespace spinstar {

double period(const ModelSpec& spec) {
  spec.validate();
  const bool integer_total = (spec.j1.twice() + spec.N) % 2 == 0;
  return (integer_total ? 2.0 : 4.0) * std::numbers::pi / spec.A;
}

ExactPropagator::ExactPropagator(const ModelSpec& spec, const DensityMatrix& rho0, double weight_floor)
    : spec_(spec), dim_(static_cast<std::size_t>(spec.dim())) {
  spec.validate();
  if (spec.omega0 != 0.0) throw ConfigError("the Clebsch-Gordan solution needs omega0 = 0");
  if (rho0.j1() != spec.j1) throw ConfigError("initial state spin does not match j1");
  rho0.validate(1e-10);

  const HalfInt j1 = spec.j1;
  const int k = static_cast<int>(dim_);
  const ComplexMatrix& r0 = rho0.matrix();
  // Dense spectra per element, indexed by n + offset.
  const int nmax = j1.twice() * (j1.twice() + spec.N + 1) + 1;
  std::vector<std::vector<cplx>> dense(dim_ * dim_, std::vector<cplx>(static_cast<std::size_t>(2 * nmax + 1)));

  for (HalfInt j2 : bath_spins(spec.N)) {
    std::vector<double> w;
    double kept = 0.0;
    for (HalfInt m2 = j2; m2 >= -j2; m2 -= HalfInt(1)) {  // bath index order
      const double wi = std::exp(log_sector_weight(spec.N, j2, m2, spec.beta));
      if (wi < weight_floor) {
        dropped_ += wi;
        w.push_back(0.0);
      } else {
        w.push_back(wi);
        kept += wi;
      }
    }
    if (kept == 0.0) continue;

    // Allowed total spins J = |j1 - j2| .. j1 + j2.
    std::vector<HalfInt> Js;
    for (HalfInt J = abs(j1 - j2); J <= j1 + j2; J += HalfInt(1)) Js.push_back(J);
    const std::size_t nJ = Js.size();
    const int nb = j2.twice() + 1;
    // cg[(J * k + a) * nb + b] = C^{J, m_a + m_b}_{j1 m_a, j2 m_b}
    std::vector<double> cg(nJ * dim_ * static_cast<std::size_t>(nb));
    for (std::size_t J = 0; J < nJ; ++J)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < nb; ++b) {
          const HalfInt ma = projection_at(j1, static_cast<std::size_t>(a));
          const HalfInt mb = projection_at(j2, static_cast<std::size_t>(b));
          cg[(J * dim_ + static_cast<std::size_t>(a)) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)] =
              clebsch_gordan(j1, ma, j2, mb, Js[J], ma + mb);
        }
    auto C = [&](std::size_t J, int a, int b) {
      return cg[(J * dim_ + static_cast<std::size_t>(a)) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)];
    };

    // With index i = j1 - m, shifting m by -Delta moves the central index by
    // +Delta and the bath index of m2 - Delta by +Delta.
    std::vector<cplx> coef(nJ * nJ);
    std::vector<double> pa(nJ), pb(nJ);
    for (int ia = 0; ia < k; ++ia)
      for (int ib = 0; ib < k; ++ib) {
        std::fill(coef.begin(), coef.end(), cplx{});
        bool any = false;
        for (int d = -(k - 1); d <= k - 1; ++d) {
          const int ca = ia + d, cb = ib + d;
          if (ca < 0 || ca >= k || cb < 0 || cb >= k) continue;
          const cplx r = r0(static_cast<std::size_t>(ca), static_cast<std::size_t>(cb));
          if (r == cplx{}) continue;
          for (int b2 = 0; b2 < nb; ++b2) {
            const int b2s = b2 + d;  // bath index of m2 - Delta
            if (b2s < 0 || b2s >= nb || w[static_cast<std::size_t>(b2)] == 0.0) continue;
            bool nonzero = false;
            for (std::size_t J = 0; J < nJ; ++J) {
              pa[J] = C(J, ia, b2s) * C(J, ca, b2);
              pb[J] = C(J, ib, b2s) * C(J, cb, b2);
              nonzero = nonzero || pa[J] != 0.0;
            }
            if (!nonzero) continue;
            const cplx f = w[static_cast<std::size_t>(b2)] * r;
            for (std::size_t J = 0; J < nJ; ++J) {
              if (pa[J] == 0.0) continue;
              for (std::size_t Jp = 0; Jp < nJ; ++Jp) coef[J * nJ + Jp] += f * (pa[J] * pb[Jp]);
            }
            any = true;
          }
        }
        if (!any) continue;
        auto& spec_row = dense[static_cast<std::size_t>(ia) * dim_ + static_cast<std::size_t>(ib)];
        for (std::size_t J = 0; J < nJ; ++J)
          for (std::size_t Jp = 0; Jp < nJ; ++Jp) {
            const int tj = Js[J].twice(), tp = Js[Jp].twice();
            const int n = (tj * (tj + 2) - tp * (tp + 2)) / 4;
            spec_row[static_cast<std::size_t>(n + nmax)] += coef[J * nJ + Jp];
          }
      }
  }

  lines_.resize(dim_ * dim_);
  for (std::size_t e = 0; e < dense.size(); ++e)
    for (int i = 0; i <= 2 * nmax; ++i) {
      const cplx v = dense[e][static_cast<std::size_t>(i)];
      if (v != cplx{}) lines_[e].push_back({i - nmax, v});
    }
}

std::size_t ExactPropagator::spectrum_size() const {
  std::size_t s = 0;
  for (const auto& l : lines_) s += l.size();
  return s;
}

cplx ExactPropagator::element(std::size_t row, std::size_t col, double t) const {
  cplx sum;
  const double w = -0.5 * spec_.A * t;
  for (const Line& l : lines_[row * dim_ + col]) sum += l.amp * std::polar(1.0, w * l.n);
  return sum;
}

ComplexMatrix ExactPropagator::at(double t) const {
  ComplexMatrix out(dim_);
  std::map<int, cplx> phases;
  const double w = -0.5 * spec_.A * t;
  for (std::size_t e = 0; e < lines_.size(); ++e) {
    cplx sum;
    for (const Line& l : lines_[e]) {
      auto [it, fresh] = phases.try_emplace(l.n);
      if (fresh) it->second = std::polar(1.0, w * l.n);
      sum += l.amp * it->second;
    }
    out.data()[e] = sum;
  }
  return out;
}

cplx exact_element(const ModelSpec& spec, const DensityMatrix& rho0, HalfInt m, HalfInt mt, double t) {
  const std::size_t r = index_of(spec.j1, m), c = index_of(spec.j1, mt);
  return ExactPropagator(spec, rho0).element(r, c, t);
}

TimeSeries exact_evolve(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid) {
  const ExactPropagator prop(spec, rho0);
  TimeSeries ts;
  ts.method = "EXACT";
  ts.model = spec;
  ts.times = grid.times();
  ts.values.reserve(ts.times.size());
  for (double t : ts.times) ts.values.push_back(prop.at(t));
  ts.meta["dropped_weight"] = std::to_string(prop.dropped_weight());
  return ts;
}

}  // namespace spinstar
