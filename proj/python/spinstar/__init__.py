"""Central spin in a spin-1/2 bath: exact dynamics, an exact-diagonalization
oracle and second-order NZ/TCL master equations.

States are numpy complex arrays ordered m = j1, j1-1, ..., -j1.
"""

from ._spinstar import (
    ConfigError,
    GuardError,
    NumericalError,
    SpinstarError,
    basis_state,
    clebsch_gordan,
    degeneracy,
    evolve,
    exact_state,
    log_degeneracy,
    log_partition_function,
    methods,
    nz2_block,
    oracle_state,
    partition_function,
    period,
    random_state,
    tcl_j1_largem,
)

__all__ = [
    "ConfigError",
    "GuardError",
    "NumericalError",
    "SpinstarError",
    "basis_state",
    "clebsch_gordan",
    "degeneracy",
    "evolve",
    "exact_state",
    "log_degeneracy",
    "log_partition_function",
    "methods",
    "nz2_block",
    "oracle_state",
    "partition_function",
    "period",
    "random_state",
    "tcl_j1_largem",
]
