#pragma once

#include <vector>

#include "spinstar/integrators.hpp"
#include "spinstar/model.hpp"

namespace spinstar {

struct BruteForceOptions {
  /// Raise the bath-size limit from 8 to 12.
  bool allow_large = false;
};

/// Literal propagation on the full (2 j1 + 1) 2^N dimensional space.
///
/// H = omega0 S_z + A sum_k S.s_k is built from explicit spin matrices and
/// diagonalized block by block in total S_z + J_z. The propagator does not
/// depend on beta or on the initial state, so one instance serves many.
class BruteForcePropagator {
 public:
  explicit BruteForcePropagator(const ModelSpec& spec, const BruteForceOptions& options = {});

  /// Bath-traced map rho0 -> rho_S(t), split by the bath J_z of the initial
  /// product state so that any temperature can be applied afterwards.
  struct Transfer {
    std::size_t k = 0;
    /// [M index][a][b][c][d], M index = number of flipped-down bath spins.
    std::vector<cplx> data;
  };
  Transfer transfer(double t) const;

  /// rho_S(t) for the initial state rho0 (x) exp(-beta J_z)/Z.
  ComplexMatrix apply(const Transfer& tr, const ComplexMatrix& rho0, double beta) const;

  ComplexMatrix evolve(const ComplexMatrix& rho0, double beta, double t) const { return apply(transfer(t), rho0, beta); }

  int max_block() const;

 private:
  struct Block {
    std::vector<std::size_t> states;
    std::vector<double> energies;
    ComplexMatrix vectors;
  };
  ModelSpec spec_;
  std::size_t k_;
  std::size_t bath_dim_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<std::size_t> pos_of_;
};

TimeSeries brute_force_evolve(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid,
                              const BruteForceOptions& options = {});

}  // namespace spinstar
