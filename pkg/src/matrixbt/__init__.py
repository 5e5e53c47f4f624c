"""Toeplitz operators with matrix symbols over domains of normal matrices.

Symbols, Fock/Bergman Toeplitz matrices, Monte-Carlo integration over
commuting normal tuples, semiclassical residual fits and reproducing kernels.
"""

__version__ = "0.1.0"

from .symbols import (  # noqa: E402
    Symbol,
    SymbolParseError,
    cochain_C,
    d_z,
    d_zbar,
    flat,
    laplacian_prime,
    pi_h,
    pi_h_series,
    poisson,
    upsilon,
)
from .fock import DomainSpec, FockBasis, ToeplitzMatrix, effective_block, op_norm, toeplitz_matrix  # noqa: E402
from .domain import McEstimate, NormalTuple, haar_sample, mc_integrate, mu_sample  # noqa: E402
from .hilbert import TheoremReport, compare_spectral, compare_u_invariant, gram_mc, verify_gram  # noqa: E402
from .semiclassical import (  # noqa: E402
    ExpansionReport,
    decay_table,
    expansion_check_spectral,
    expansion_check_u_invariant,
    residual_scalar,
    sign_probe,
    sup_norm_limit,
)
from .kernels import KernelSeries, coherent_state, kernel_eval, product_gram_mc, reproduce_check  # noqa: E402
