"""Normal-matrix domains, their measures, and Monte-Carlo integration.

A point of the domain is a commuting n-tuple of normal N x N matrices
Z_j = U^* diag_k(d[k, j]) U sharing one unitary U.  The measure is Haar on U
times N independent copies of the scalar measure mu_h on the eigenvalue rows.
Everything here is vectorized over an optional leading sample axis.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fock import DomainSpec, moment
from .symbols import Symbol, check_symmetric_tail

DEFAULT_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class NormalTuple:
    """Commuting normal tuple stored as ``U`` (..., N, N) and ``d`` (..., N, n).

    Row k of ``d`` is the joint eigenvalue of the tuple on the k-th
    eigenvector; the matrices are Z_j = U^* diag(d[:, j]) U.
    """

    U: np.ndarray
    d: np.ndarray

    @property
    def N(self) -> int:
        return self.U.shape[-1]

    @property
    def n(self) -> int:
        return self.d.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.U.shape[:-2]

    def conjugate(self, D: np.ndarray) -> np.ndarray:
        """U^* diag(D) U for diagonal data D of shape (..., N)."""
        return np.einsum("...ai,...a,...aj->...ij", self.U.conj(), D, self.U)

    def matrix(self, j: int = 0) -> np.ndarray:
        return self.conjugate(self.d[..., j])

    def matrices(self) -> np.ndarray:
        """All entries of the tuple, shape (..., n, N, N)."""
        return np.stack([self.matrix(j) for j in range(self.n)], axis=-3)

    def spectral_radius(self) -> np.ndarray:
        return np.abs(self.d).max(axis=(-2, -1))

    def check(self, dom: DomainSpec | None = None, atol: float = 1e-10) -> None:
        """Raise ``ValueError`` if any stored invariant fails."""
        eye = np.eye(self.N)
        err = np.linalg.norm(np.swapaxes(self.U.conj(), -1, -2) @ self.U - eye, axis=(-2, -1))
        if np.max(err, initial=0.0) > 1e-12:
            raise ValueError("U is not unitary")
        Z = self.matrices()
        for j in range(self.n):
            for k in range(self.n):
                Zk_h = np.swapaxes(Z[..., k, :, :].conj(), -1, -2)
                comm = Z[..., j, :, :] @ Zk_h - Zk_h @ Z[..., j, :, :]
                if np.max(np.abs(comm), initial=0.0) > atol:
                    raise ValueError("tuple entries are not commuting normal matrices")
        if dom is not None and dom.kind == "disc" and np.any(np.abs(self.d) >= 1):
            raise ValueError("eigenvalues outside the unit disc")

    def __getitem__(self, idx) -> NormalTuple:
        return NormalTuple(self.U[idx], self.d[idx])

    @classmethod
    def diagonal(cls, d) -> NormalTuple:
        """U = I; ``d`` is (N,) or (N, n)."""
        d = np.asarray(d, dtype=complex)
        if d.ndim == 1:
            d = d[:, None]
        return cls(np.eye(d.shape[0], dtype=complex), d)

    def transform(self, V: np.ndarray) -> NormalTuple:
        """Z -> V^* Z V, i.e. U -> U V."""
        return NormalTuple(self.U @ V, self.d)


# ---------------------------------------------------------------------------
# sampling


def haar_sample(N: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Haar-distributed unitaries via QR of a complex Ginibre matrix.

    Each column of Q is rotated by the phase of the matching R diagonal entry so
    that the factorization has a positive R diagonal; without that fix QR is not
    Haar.
    """
    if N < 1:
        raise ValueError("N must be positive")
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (N, N)
    G = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return Q * phase[..., None, :]


def scalar_sample(dom: DomainSpec, rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. draws from mu_h on the plane or the disc."""
    h = dom.h
    if dom.kind == "plane":
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(h / 2)
    t = rng.beta(1.0, 1.0 / h - 1.0, size=shape)
    theta = rng.uniform(0.0, 2 * np.pi, size=shape)
    return np.sqrt(t) * np.exp(1j * theta)


def mu_sample(dom: DomainSpec, N: int, n: int = 1, rng=None, size=None) -> NormalTuple:
    """Draw from the normalized product measure dU x mu_h^N on the matrix domain."""
    if n < 1:
        raise ValueError("n must be positive")
    if dom.kind == "disc" and n != 1:
        raise ValueError("the disc domain is one-dimensional (n = 1)")
    rng = np.random.default_rng(rng)
    batch = () if size is None else tuple(np.atleast_1d(size))
    U = haar_sample(N, rng, size)
    d = scalar_sample(dom, rng, batch + (N, n))
    return NormalTuple(U, d)


def product_sample(dom: DomainSpec, N: int, n: int, rng=None, size=None) -> list[NormalTuple]:
    """n independent normal matrices (each with its own unitary), the
    non-commuting product domain."""
    rng = np.random.default_rng(rng)
    return [mu_sample(dom, N, 1, rng, size) for _ in range(n)]


# ---------------------------------------------------------------------------
# matrix functions


def spectral_apply(f: Symbol, Z: NormalTuple) -> np.ndarray:
    """f^#(Z) = U^* diag_k(f(d_k)) U with f a symbol in n variables."""
    if f.num_vars != Z.n:
        raise ValueError(f"symbol has {f.num_vars} variables, tuple has n={Z.n}")
    return Z.conjugate(f(Z.d))


def _tail_arguments(d: np.ndarray) -> np.ndarray:
    """(..., N, N): row k is (d_k; d_1, .., d_k omitted, .., d_N)."""
    N = d.shape[-1]
    idx = np.array([[k] + [m for m in range(N) if m != k] for k in range(N)])
    return d[..., idx]


def u_invariant_apply(phi: Symbol, Z: NormalTuple) -> np.ndarray:
    """phi^#(Z) = U^* diag_k(phi(d_k; d_1..^d_k..d_N)) U for a symbol with a
    symmetric tail."""
    if Z.n != 1:
        raise ValueError("u_invariant_apply is defined for n = 1")
    if phi.num_vars != Z.N:
        raise ValueError(f"symbol has {phi.num_vars} variables, expected N={Z.N}")
    if phi.num_vars >= 2 and not check_symmetric_tail(phi):
        raise ValueError("symbol is not symmetric in its last N-1 variables")
    args = _tail_arguments(Z.d[..., 0])
    return Z.conjugate(phi(args))


def haar_conj_average(X) -> np.ndarray:
    """int U^* X U dU = (Tr X / N) I."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("X must be square")
    N = X.shape[0]
    return np.trace(X) / N * np.eye(N, dtype=complex)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True, eq=False)
class McEstimate:
    """Entrywise sample mean with its standard error."""

    mean: np.ndarray
    stderr: np.ndarray
    samples: int

    def z_scores(self, target, floor: float = 1e-12) -> np.ndarray:
        """|mean - target| / stderr; entries with zero spread and zero
        discrepancy score 0."""
        diff = np.abs(self.mean - target)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.stderr > 0, diff / self.stderr, np.where(diff <= floor, 0.0, np.inf))
        return np.where(diff <= floor, 0.0, z)

    def to_json(self) -> dict:
        mean = np.asarray(self.mean)
        return {
            "samples": self.samples,
            "mean": {"re": mean.real.tolist(), "im": mean.imag.tolist()},
            "stderr": np.asarray(self.stderr).tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for one fixed-size sample block, keyed by (seed, block index)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


def mc_mean(
    f: Callable,
    draw: Callable,
    samples: int,
    seed: int = 0,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> McEstimate:
    """Generic estimator: ``draw(rng, size)`` produces a batch of points and
    ``f(points)`` maps them to values with a leading sample axis.

    Samples are split into fixed-size blocks with their own seeds and merged in
    block order, so the result does not depend on ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)

    def run(i):
        vals = np.asarray(f(draw(block_rng(seed, i), sizes[i])))
        vals = vals.astype(complex, copy=False)
        m = vals.mean(axis=0)
        m2 = (np.abs(vals - m) ** 2).sum(axis=0)
        return vals.shape[0], m, m2

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]

    count, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = count + nb
        delta = mb - mean
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + np.abs(delta) ** 2 * (count * nb / tot)
        count = tot
    stderr = np.sqrt(m2 / (count - 1) / count)
    return McEstimate(mean, stderr, count)


def mc_integrate(
    f: Callable[[NormalTuple], np.ndarray],
    dom: DomainSpec,
    N: int,
    n: int = 1,
    samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> McEstimate:
    """Monte-Carlo estimate of int f dmu_h over the normal-matrix domain.

    ``f`` receives a batched :class:`NormalTuple` and returns values with a
    leading sample axis.
    """
    draw = lambda rng, size: mu_sample(dom, N, n, rng, size)  # noqa: E731
    return mc_mean(f, draw, samples, seed, workers, block_size)


def power_moments_mc(dom: DomainSpec, N: int, kmax: int = 4, samples: int = 100_000,
                     seed: int = 0, workers: int = 1) -> McEstimate:
    """Estimates of int Z^{*j} Z^k dmu for j, k <= kmax, shape (kmax+1, kmax+1, N, N)."""

    def f(Z):
        M = Z.matrix()
        P = [np.broadcast_to(np.eye(N, dtype=complex), M.shape)]
        for _ in range(kmax):
            P.append(P[-1] @ M)
        Ph = [np.swapaxes(p.conj(), -1, -2) for p in P]
        return np.stack([np.stack([Ph[j] @ P[k] for k in range(kmax + 1)], axis=1)
                         for j in range(kmax + 1)], axis=1)

    return mc_integrate(f, dom, N, 1, samples, seed, workers)


def power_moments_exact(dom: DomainSpec, N: int, kmax: int = 4) -> np.ndarray:
    """delta_jk m_k I with m_k = int |z|^{2k} dmu_h (k! h^k on the plane)."""
    out = np.zeros((kmax + 1, kmax + 1, N, N), dtype=complex)
    for k in range(kmax + 1):
        out[k, k] = moment(dom, k, k) * np.eye(N)
    return out
