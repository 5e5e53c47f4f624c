"""Matrix reproducing kernels, coherent states and the product-domain kernel.

For a single normal matrix the kernel is sum_k psi_k^#(X) psi_k^#(Y)^* with
psi_k the orthonormal monomials of the scalar space.  Writing X = U^* D U and
Y = V^* E V this equals U^* ((U V^*) o kappa(d, e)) V, where kappa is the
truncated scalar kernel on eigenvalue pairs and o is the entrywise product.
The product-domain kernel is summed directly from matrix powers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import NormalTuple, mc_integrate, mc_mean, product_sample
from .fock import DomainSpec, FockBasis, log_moment
from .hilbert import basis_matrices

TAIL_TOL = 1e-12


class TailBoundError(ValueError):
    """The requested truncation cannot certify the series tail."""


@dataclass(frozen=True)
class KernelSeries:
    """Truncated kernel series of degree ``K_max`` for the space over ``dom``."""

    dom: DomainSpec
    K_max: int = 60
    tol: float = TAIL_TOL

    @property
    def h(self) -> float:
        return self.dom.h

    def log_norms(self) -> np.ndarray:
        return FockBasis(self.dom, self.K_max).log_norms

    def tail_bound(self, rho: float) -> float:
        """Bound on sum_{k > K_max} rho^k / m_k with rho = rho_X * rho_Y."""
        K = self.K_max
        if rho == 0:
            return 0.0
        log_term = (K + 1) * math.log(rho) - log_moment(self.dom, K + 1)
        if self.dom.kind == "plane":
            q = rho / (self.h * (K + 2))
        else:
            q = rho * (1 + (K + 1) * self.h) / ((K + 2) * self.h)
        if q >= 1:
            return math.inf
        return math.exp(log_term) / (1 - q)

    def check(self, rho) -> None:
        rho = float(np.max(rho))
        bound = self.tail_bound(rho)
        if not bound < self.tol:
            raise TailBoundError(
                f"series tail bound {bound:.3g} >= {self.tol:g} at rho={rho:.4g}; raise K_max"
            )

    @classmethod
    def for_radius(cls, dom: DomainSpec, rho: float, tol: float = TAIL_TOL, K_max: int = 8):
        """Smallest K_max (from ``K_max`` up) whose tail bound at ``rho`` is below ``tol``."""
        while cls(dom, K_max, tol).tail_bound(rho) >= tol:
            K_max += 1
            if K_max > 100_000:
                raise TailBoundError("series does not converge at this radius")
        return cls(dom, K_max, tol)


def scalar_kernel(x, y, ks: KernelSeries) -> np.ndarray:
    """Truncated sum_k x^k conj(y)^k / m_k, broadcasting over ``x`` and ``y``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    w = x * y.conj()
    inv_m = np.exp(-ks.log_norms())
    # Horner in w
    acc = np.full(w.shape, inv_m[-1], dtype=complex)
    for c in inv_m[-2::-1]:
        acc = acc * w + c
    return acc


def _as_tuple(X) -> NormalTuple:
    if isinstance(X, NormalTuple):
        return X
    raise TypeError("expected a NormalTuple")


def kernel_eval(X: NormalTuple, Y: NormalTuple, ks: KernelSeries) -> np.ndarray:
    """K(X, Y) = sum_{k<=K_max} psi_k^#(X) psi_k^#(Y)^*; broadcasts over batch axes."""
    X, Y = _as_tuple(X), _as_tuple(Y)
    if X.n != 1 or Y.n != 1:
        raise ValueError("kernel_eval is defined for single normal matrices (n = 1)")
    ks.check(X.spectral_radius() * Y.spectral_radius())
    dx, dy = X.d[..., 0], Y.d[..., 0]
    kappa = scalar_kernel(dx[..., :, None], dy[..., None, :], ks)
    W = X.U @ np.swapaxes(Y.U.conj(), -1, -2)
    return np.swapaxes(X.U.conj(), -1, -2) @ (W * kappa) @ Y.U


def hermitian_inv_sqrt(A, floor: float = 1e-12) -> np.ndarray:
    """A^{-1/2} for Hermitian positive definite A; refuses near-singular input."""
    A = np.asarray(A)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    if np.min(w) < floor:
        raise np.linalg.LinAlgError(f"matrix is singular to tolerance {floor:g}: min eigenvalue {np.min(w):.3g}")
    return (V / np.sqrt(w)) @ V.conj().T


def coherent_state(Z: NormalTuple, chi, ks: KernelSeries):
    """X -> K(X, Z) K(Z, Z)^{-1/2} chi."""
    chi = np.asarray(chi, dtype=complex)
    v = hermitian_inv_sqrt(kernel_eval(Z, Z, ks)) @ chi

    def k(X: NormalTuple) -> np.ndarray:
        return kernel_eval(X, Z, ks) @ v

    return k


@dataclass
class ReproduceReport:
    k: int
    j: int
    N: int
    h: float
    domain: str
    samples: int
    max_z: float
    passed: bool

    def to_json(self) -> dict:
        return {"k": self.k, "j": self.j, "N": self.N, "h": self.h, "domain": self.domain,
                "samples": self.samples, "max_z": self.max_z, "pass": self.passed}


def reproduce_check(k: int, j: int, Z: NormalTuple, ks: KernelSeries, samples: int = 100_000,
                    seed: int = 0, workers: int = 1, threshold: float = 5.0) -> ReproduceReport:
    """MC estimate of int K(Z, X) e_k^#(X) chi_j dmu(X) against e_k^#(Z) chi_j (j 1-based)."""
    if k > ks.K_max:
        raise ValueError("k exceeds the kernel truncation")
    N = Z.N
    basis = FockBasis(ks.dom, k)
    chi = np.eye(N)[j - 1]

    def f(X):
        Zb = NormalTuple(np.broadcast_to(Z.U, X.U.shape), np.broadcast_to(Z.d, X.d.shape))
        Kzx = kernel_eval(Zb, X, ks)
        E = basis_matrices(X, basis)[..., k, :, :]
        return Kzx @ E @ chi

    est = mc_integrate(f, ks.dom, N, 1, samples, seed, workers)
    target = basis_matrices(Z, basis)[k] @ chi
    max_z = float(np.max(est.z_scores(target)))
    return ReproduceReport(k, j, N, ks.h, ks.dom.kind, samples, max_z, max_z <= threshold)


# ---------------------------------------------------------------------------
# product domain (non-commuting tuples)


def _dag(A):
    return np.swapaxes(np.asarray(A).conj(), -1, -2)


def product_kernel_eval(Xs: Sequence, Ys: Sequence, ks: KernelSeries, order=None) -> np.ndarray:
    """sum_k X_{o1}^{k1} .. X_{on}^{kn} Y_{on}^{*kn} .. Y_{o1}^{*k1} / (m_k1 .. m_kn).

    ``Xs``/``Ys`` are sequences of normal matrices (arrays or NormalTuples);
    ``order`` permutes the factors (default 0..n-1).
    """
    Xs = [x.matrix() if isinstance(x, NormalTuple) else np.asarray(x, dtype=complex) for x in Xs]
    Ys = [y.matrix() if isinstance(y, NormalTuple) else np.asarray(y, dtype=complex) for y in Ys]
    n = len(Xs)
    if len(Ys) != n:
        raise ValueError("X and Y tuples differ in length")
    order = list(range(n)) if order is None else list(order)
    for X, Y in zip(Xs, Ys):
        rho = np.max(np.abs(np.linalg.eigvals(X)), axis=-1) * np.max(np.abs(np.linalg.eigvals(Y)), axis=-1)
        ks.check(rho)
    inv_m = np.exp(-ks.log_norms())
    N = Xs[0].shape[-1]
    inner = np.broadcast_to(np.eye(N, dtype=complex), np.broadcast_shapes(Xs[0].shape, Ys[0].shape))
    for i in reversed(order):
        X, Yh = Xs[i], _dag(Ys[i])
        acc = np.zeros_like(inner)
        left = np.broadcast_to(np.eye(N, dtype=complex), inner.shape)
        right = left
        for k in range(ks.K_max + 1):
            acc = acc + inv_m[k] * (left @ inner @ right)
            left = left @ X
            right = Yh @ right
        inner = acc
    return inner


def product_gram_mc(dom: DomainSpec, N: int, n: int, kmax: int, samples: int = 100_000,
                    seed: int = 0, workers: int = 1, order=None):
    """Normalized Gram matrix of Z_{o1}^{k1}..Z_{on}^{kn} chi_j under the product
    measure; its expectation is the identity.

    Multi-indices run over {0..kmax}^n in lexicographic order, flattened with
    the internal index j fastest.
    """
    order = list(range(n)) if order is None else list(order)
    indices = list(itertools.product(range(kmax + 1), repeat=n))
    log_m = FockBasis(dom, kmax).log_norms
    scale = np.array([math.exp(-0.5 * sum(log_m[k] for k in ks)) for ks in indices])

    def f(Zs):
        mats = [Z.matrix() for Z in Zs]
        powers = [[np.broadcast_to(np.eye(N, dtype=complex), M.shape)] for M in mats]
        for i, M in enumerate(mats):
            for _ in range(kmax):
                powers[i].append(powers[i][-1] @ M)
        vecs = []
        for ks_, s in zip(indices, scale):
            P = powers[order[0]][ks_[order[0]]]
            for i in order[1:]:
                P = P @ powers[i][ks_[i]]
            vecs.append(s * P)
        B = np.stack(vecs, axis=1)  # (S, I, N, N); column j of B[:, a] is f_a chi_j
        S, I = B.shape[:2]
        G = np.einsum("sbrm,skrj->sbmkj", B.conj(), B)  # <f_k chi_j, f_b chi_m>
        return G.reshape(S, I * N, I * N)

    draw = lambda rng, size: product_sample(dom, N, n, rng, size)  # noqa: E731
    return mc_mean(f, draw, samples, seed, workers)


def product_toeplitz_mismatch(dom: DomainSpec, N: int = 2, kmax: int = 1, samples: int = 100_000,
                              seed: int = 0, factor: int = 1) -> dict:
    """Demonstration that Toeplitz operators on the product domain do not
    match scalar Toeplitz operators on C^n.

    The symbol is left multiplication by Z_{factor+1}; its matrix elements on
    the normalized monomial basis Z_1^{k1} Z_2^{k2} chi_j are compared with
    those of T_{z_{factor+1}} (x) I.
    """
    n = 2
    indices = list(itertools.product(range(kmax + 1), repeat=n))
    log_m = FockBasis(dom, kmax + 1).log_norms
    scale = np.array([math.exp(-0.5 * sum(log_m[k] for k in ks)) for ks in indices])

    def f(Zs):
        mats = [Z.matrix() for Z in Zs]
        eye = np.broadcast_to(np.eye(N, dtype=complex), mats[0].shape)
        vecs = []
        for ks_, s in zip(indices, scale):
            P = eye
            for i in range(n):
                P = P @ np.linalg.matrix_power(mats[i], ks_[i])
            vecs.append(s * P)
        B = np.stack(vecs, axis=1)
        A = mats[factor][:, None] @ B
        G = np.einsum("sbrm,skrj->sbmkj", B.conj(), A)
        S, I = B.shape[:2]
        return G.reshape(S, I * N, I * N)

    est = mc_mean(f, lambda rng, size: product_sample(dom, N, n, rng, size), samples, seed)
    # oracle: multiplication by z_i on orthonormal monomials of C^n
    I = len(indices)
    T = np.zeros((I, I))
    for col, ks_ in enumerate(indices):
        up = list(ks_)
        up[factor] += 1
        if tuple(up) in indices:
            row = indices.index(tuple(up))
            T[row, col] = math.exp(0.5 * (log_m[up[factor]] - log_m[ks_[factor]]))
    target = np.kron(T, np.eye(N))
    z = est.z_scores(target)
    return {"max_z": float(np.max(z)), "frobenius": float(np.linalg.norm(est.mean - target)),
            "samples": samples, "N": N, "h": dom.h, "factor": factor + 1,
            "mismatch": bool(np.max(z) > 5.0)}
