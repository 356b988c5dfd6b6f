#include "spinstar/brute_force.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <string>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/hermitian_eigen.hpp"

namespace spinstar {

// Basis state index = a * 2^N + bits; a is the central-spin row index and
// bit k set means bath spin k points down.
BruteForcePropagator::BruteForcePropagator(const ModelSpec& spec, const BruteForceOptions& options)
    : spec_(spec), k_(static_cast<std::size_t>(spec.dim())) {
  spec.validate();
  const int limit = options.allow_large ? 12 : 8;
  if (spec.N > limit)
    throw GuardError("brute-force oracle limited to N <= " + std::to_string(limit) + ", got N=" + std::to_string(spec.N));
  bath_dim_ = std::size_t{1} << spec.N;
  const std::size_t dim = k_ * bath_dim_;

  auto twice_total = [&](std::size_t x) {
    const std::size_t a = x / bath_dim_, bits = x % bath_dim_;
    const int down = std::popcount(bits);
    return projection_at(spec.j1, a).twice() + (spec.N - 2 * down);
  };
  std::map<int, std::size_t> block_index;
  block_of_.resize(dim);
  pos_of_.resize(dim);
  for (std::size_t x = 0; x < dim; ++x) {
    auto [it, fresh] = block_index.try_emplace(twice_total(x), blocks_.size());
    if (fresh) blocks_.emplace_back();
    block_of_[x] = it->second;
    pos_of_[x] = blocks_[it->second].states.size();
    blocks_[it->second].states.push_back(x);
  }

  const double jj = spec.j1.value() * (spec.j1.value() + 1.0);
  for (Block& blk : blocks_) {
    const std::size_t n = blk.states.size();
    ComplexMatrix h(n);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t x = blk.states[p];
      const std::size_t a = x / bath_dim_, bits = x % bath_dim_;
      const double m = projection_at(spec.j1, a).value();
      const double M = 0.5 * (spec.N - 2 * std::popcount(bits));
      h(p, p) += spec.omega0 * m + spec.A * m * M;
      if (a == 0) continue;
      // (A/2) S+ s-_k: raise the central spin, flip an up bath spin down.
      const double amp = 0.5 * spec.A * std::sqrt(jj - m * (m + 1.0));
      for (int q = 0; q < spec.N; ++q) {
        const std::size_t bit = std::size_t{1} << q;
        if (bits & bit) continue;
        const std::size_t y = (a - 1) * bath_dim_ + (bits | bit);
        const std::size_t r = pos_of_[y];
        h(r, p) += amp;
        h(p, r) += amp;
      }
    }
    HermitianEigen eig = hermitian_eigen(h);
    blk.energies = std::move(eig.values);
    blk.vectors = std::move(eig.vectors);
  }
}

int BruteForcePropagator::max_block() const {
  std::size_t m = 0;
  for (const Block& b : blocks_) m = std::max(m, b.states.size());
  return static_cast<int>(m);
}

BruteForcePropagator::Transfer BruteForcePropagator::transfer(double t) const {
  // U restricted to each block: V exp(-i E t) V^dagger.
  std::vector<ComplexMatrix> u(blocks_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& blk = blocks_[bi];
    const std::size_t n = blk.states.size();
    ComplexMatrix left = blk.vectors;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) left(r, c) *= std::polar(1.0, -blk.energies[c] * t);
    u[bi] = left * blk.vectors.adjoint();
  }
  auto U = [&](std::size_t x, std::size_t y) -> cplx {
    if (block_of_[x] != block_of_[y]) return 0.0;
    return u[block_of_[x]](pos_of_[x], pos_of_[y]);
  };

  const std::size_t k = k_, k4 = k * k * k * k;
  Transfer tr;
  tr.k = k;
  tr.data.assign(static_cast<std::size_t>(spec_.N + 1) * k4, cplx{});
  std::vector<cplx> ua(k * k);
  for (std::size_t beta_state = 0; beta_state < bath_dim_; ++beta_state) {
    cplx* slab = tr.data.data() + static_cast<std::size_t>(std::popcount(beta_state)) * k4;
    for (std::size_t gamma = 0; gamma < bath_dim_; ++gamma) {
      bool any = false;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) {
          ua[a * k + c] = U(a * bath_dim_ + gamma, c * bath_dim_ + beta_state);
          any = any || ua[a * k + c] != cplx{};
        }
      if (!any) continue;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < k; ++c) {
          const cplx x = ua[a * k + c];
          if (x == cplx{}) continue;
          for (std::size_t b = 0; b < k; ++b)
            for (std::size_t d = 0; d < k; ++d) {
              const cplx y = ua[b * k + d];
              if (y == cplx{}) continue;
              slab[((a * k + b) * k + c) * k + d] += x * std::conj(y);
            }
        }
    }
  }
  return tr;
}

ComplexMatrix BruteForcePropagator::apply(const Transfer& tr, const ComplexMatrix& rho0, double beta) const {
  const std::size_t k = tr.k, k4 = k * k * k * k;
  if (rho0.rows() != k || rho0.cols() != k) throw ConfigError("initial state dimension mismatch");
  const double log_z = log_partition_function(spec_.N, beta);
  ComplexMatrix out(k);
  for (int down = 0; down <= spec_.N; ++down) {
    const double M = 0.5 * (spec_.N - 2 * down);
    const double w = std::exp(-beta * M - log_z);
    const cplx* slab = tr.data.data() + static_cast<std::size_t>(down) * k4;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        cplx s;
        for (std::size_t c = 0; c < k; ++c)
          for (std::size_t d = 0; d < k; ++d) s += slab[((a * k + b) * k + c) * k + d] * rho0(c, d);
        out(a, b) += w * s;
      }
  }
  return out;
}

TimeSeries brute_force_evolve(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid,
                              const BruteForceOptions& options) {
  if (rho0.j1() != spec.j1) throw ConfigError("initial state spin does not match j1");
  const BruteForcePropagator prop(spec, options);
  TimeSeries ts;
  ts.method = "ORACLE";
  ts.model = spec;
  ts.times = grid.times();
  for (double t : ts.times) ts.values.push_back(prop.evolve(rho0.matrix(), spec.beta, t));
  return ts;
}

}  // namespace spinstar
