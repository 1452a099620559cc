"""Dissipative Kerr cavity in a truncated Fock space.

The closed-form operator-sum solution lives in :mod:`kerrcavity.kraus`; the
RK4 and Liouvillian-exponential routes in :mod:`kerrcavity.solvers` serve as
independent checks.
"""

from .eigen import hermitian_eigenvalues, jacobi_eigh
from .fock import (
    Cat,
    Coherent,
    DensityMatrix,
    Fock,
    Thermal,
    Truncation,
    annihilation_matrix,
    make_state,
    mixture,
    number_operator,
)
from .kraus import (
    ChannelParams,
    GeneralizedKrausTerm,
    LambdaTable,
    build_kraus_term,
    completeness_residual,
    evolve_amplitude_damping,
    evolve_kerr_unitary,
    evolve_kraus,
    lambda_coefficient,
    lambda_table,
    weight_coefficient,
)
from .observables import QGrid, fidelity_pure, husimi_q, mean_photon_number, purity, trace_distance
from .solvers import (
    IntegratorConfig,
    build_liouvillian,
    evolve_liouvillian,
    lindblad_rhs,
    matrix_exponential,
    rk4_evolve,
    solver_compare,
)

__version__ = "0.1.0"
