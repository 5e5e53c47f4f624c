"""Matrix-valued holomorphic space over the normal-matrix domain.

The basis e_k^#(Z) chi_j (spectral lifts of the scalar orthonormal monomials
times standard basis vectors) is flattened as (k, j) -> k*N + j with j
0-based.  Matrix elements of Toeplitz operators are plain integrals over the
domain and are estimated by Monte Carlo; the theorems reduce them to scalar
Toeplitz matrices tensored with the identity.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np

from .domain import NormalTuple, mc_integrate, spectral_apply, u_invariant_apply
from .fock import DomainSpec, FockBasis, toeplitz_matrix
from .symbols import Symbol, check_symmetric_tail, pi_h

PASS_Z = 5.0


class MatrixBasisIndex(NamedTuple):
    """Label (k, j) of e_k^# chi_j; ``j`` is 1-based, running over 1..N."""

    k: int
    j: int

    def flat(self, N: int) -> int:
        if not 1 <= self.j <= N:
            raise ValueError(f"internal index {self.j} outside 1..{N}")
        return self.k * N + (self.j - 1)

    @classmethod
    def from_flat(cls, idx: int, N: int) -> MatrixBasisIndex:
        return cls(idx // N, idx % N + 1)


def iota(coeffs, N: int) -> np.ndarray:
    """Coefficients on e_k^# chi_j (flat) -> coefficient array c[k, j-1] on
    e_k (x) chi_j.

    Both sides share the flattening k*N + (j-1), so the map is a checked
    reindexing and unitary by construction.
    """
    v = np.asarray(coeffs, dtype=complex)
    if v.ndim != 1 or v.size % N:
        raise ValueError(f"length {v.size} is not a multiple of N={N}")
    return v.reshape(v.size // N, N).copy()


def iota_inverse(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.ndim != 2:
        raise ValueError("expected a (K+1, N) coefficient array")
    return c.reshape(-1).copy()


def basis_matrices(Z: NormalTuple, basis: FockBasis) -> np.ndarray:
    """e_k^#(Z) for k = 0..K, shape (..., K+1, N, N)."""
    vals = basis(Z.d[..., 0])  # (..., N, K+1)
    vals = np.moveaxis(vals, -1, -2)  # (..., K+1, N)
    U = Z.U[..., None, :, :]
    return np.einsum("...ai,...a,...aj->...ij", U.conj(), vals, U)


def _sandwich(E: np.ndarray, Phi: np.ndarray | None) -> np.ndarray:
    """Values chi_m^* E_l^* Phi E_k chi_j arranged as (S, l*N+m, k*N+j)."""
    S, K1, N, _ = E.shape
    A = E if Phi is None else Phi[:, None] @ E
    G = np.einsum("slam,skaj->slmkj", E.conj(), A)
    return G.reshape(S, K1 * N, K1 * N)


def gram_mc(dom: DomainSpec, N: int, K: int, samples: int = 100_000, seed: int = 0, workers: int = 1):
    """Gram matrix of {e_k^# chi_j}; its expectation is the identity."""
    basis = FockBasis(dom, K)
    f = lambda Z: _sandwich(basis_matrices(Z, basis), None)  # noqa: E731
    return mc_integrate(f, dom, N, 1, samples, seed, workers)


def matrix_toeplitz_mc(
    phi_bar: Callable[[NormalTuple], np.ndarray],
    dom: DomainSpec,
    N: int,
    K: int,
    samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
):
    """Matrix elements <phi_bar e_k^# chi_j, e_l^# chi_m> at (l*N+m, k*N+j)."""
    basis = FockBasis(dom, K)

    def f(Z):
        E = basis_matrices(Z, basis)
        return _sandwich(E, np.asarray(phi_bar(Z)))

    return mc_integrate(f, dom, N, 1, samples, seed, workers)


# symbol evaluators ----------------------------------------------------------


def spectral_symbol(f: Symbol) -> Callable[[NormalTuple], np.ndarray]:
    return lambda Z: spectral_apply(f, Z)


def u_invariant_symbol(phi: Symbol) -> Callable[[NormalTuple], np.ndarray]:
    if phi.num_vars >= 2 and not check_symmetric_tail(phi):
        raise ValueError("symbol is not symmetric in its last N-1 variables")
    return lambda Z: u_invariant_apply(phi, Z)


def det_gaussian_symbol(Z: NormalTuple) -> np.ndarray:
    """|det Z|^2 exp(-Tr Z^*Z) I."""
    d = Z.d[..., 0]
    val = np.prod(np.abs(d) ** 2, axis=-1) * np.exp(-np.sum(np.abs(d) ** 2, axis=-1))
    return val[..., None, None] * np.eye(Z.N)


def det_gaussian_scalar(N: int) -> Symbol:
    """The scalar representative |d_1 ... d_N|^2 exp(-sum |d_k|^2)."""
    one = (1,) * N
    return Symbol.monomial(one, one, c=1)


# reports --------------------------------------------------------------------


@dataclass
class TheoremReport:
    theorem_part: str
    N: int
    K: int
    h: float
    samples: int
    max_z: float
    frobenius: float
    passed: bool
    threshold: float = PASS_Z
    domain: str = "plane"
    label: str = ""

    def to_json(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _report(part, est, target, dom, N, K, label) -> TheoremReport:
    max_z = float(np.max(est.z_scores(target)))
    frob = float(np.linalg.norm(est.mean - target))
    return TheoremReport(part, N, K, dom.h, est.samples, max_z, frob, max_z <= PASS_Z,
                         domain=dom.kind, label=label)


def verify_gram(dom, N, K, samples=100_000, seed=0, workers=1) -> TheoremReport:
    est = gram_mc(dom, N, K, samples, seed, workers)
    return _report("i", est, np.eye(N * (K + 1)), dom, N, K, "gram")


def compare_spectral(phi: Symbol, dom, N, K, samples=100_000, seed=0, workers=1) -> TheoremReport:
    """MC matrix Toeplitz of phi^# against T_phi (x) I."""
    est = matrix_toeplitz_mc(spectral_symbol(phi), dom, N, K, samples, seed, workers)
    target = np.kron(toeplitz_matrix(phi, FockBasis(dom, K)).entries, np.eye(N))
    return _report("ii", est, target, dom, N, K, repr(phi))


def compare_u_invariant(phi: Symbol, dom, N, K, samples=100_000, seed=0, workers=1) -> TheoremReport:
    """MC matrix Toeplitz of the U-invariant lift against T_{pi_h phi} (x) I."""
    if phi.num_vars != N:
        raise ValueError(f"symbol has {phi.num_vars} variables, expected N={N}")
    est = matrix_toeplitz_mc(u_invariant_symbol(phi), dom, N, K, samples, seed, workers)
    target = np.kron(toeplitz_matrix(pi_h(phi, dom, N), FockBasis(dom, K)).entries, np.eye(N))
    return _report("v", est, target, dom, N, K, repr(phi))
