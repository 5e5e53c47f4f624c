"""Truncated scalar holomorphic spaces over the plane and the unit disc.

The plane carries the Gaussian probability measure e^{-|z|^2/h} dz/(pi h);
the disc carries ((1-h)/(pi h)) (1-|z|^2)^{1/h-2} dz.  Monomials are
orthogonal for both, so Toeplitz matrices of polynomial x Gaussian symbols
are assembled from closed-form moments without quadrature.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .symbols import Symbol

KINDS = ("plane", "disc")


@dataclass(frozen=True)
class DomainSpec:
    """Base phase space (``"plane"`` or ``"disc"``) with Planck parameter ``h``."""

    kind: str
    h: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.kind == "disc" and not self.h < 0.5:
            raise ValueError("disc domain requires 0 < h < 1/2")

    def with_h(self, h: float) -> DomainSpec:
        return DomainSpec(self.kind, h)

    def to_json(self) -> dict:
        return {"kind": self.kind, "h": self.h}

    @classmethod
    def from_json(cls, data: dict) -> DomainSpec:
        return cls(str(data["kind"]), float(data["h"]))


def log_moment(dom: DomainSpec, a: int, c: float = 0.0) -> float:
    """log of int |z|^{2a} e^{-c|z|^2} dmu_h."""
    h = dom.h
    if dom.kind == "plane":
        return math.lgamma(a + 1) + a * math.log(h) - (a + 1) * math.log1p(c * h)
    if c:
        raise ValueError("disc moments are only available for c = 0")
    return math.lgamma(a + 1) + a * math.log(h) - sum(math.log1p(i * h) for i in range(1, a))


def moment(dom: DomainSpec, a: int, b: int, c: float = 0.0) -> float:
    """int z^a zbar^b e^{-c|z|^2} dmu_h.

    Plane: delta_ab a! h^a / (1+ch)^(a+1).  Disc: delta_ab a! h^a / prod_{i<a} (1+ih).
    """
    if a < 0 or b < 0:
        raise ValueError("exponents must be nonnegative")
    if dom.kind == "disc" and c:
        raise ValueError("disc moments are only available for c = 0")
    if a != b:
        return 0.0
    return math.exp(log_moment(dom, a, c))


@dataclass(frozen=True)
class FockBasis:
    """Orthonormal monomials e_k = z^k / sqrt(m_k), k = 0..K."""

    dom: DomainSpec
    K: int

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be nonnegative")

    @property
    def dim(self) -> int:
        return self.K + 1

    @cached_property
    def log_norms(self) -> np.ndarray:
        return np.array([log_moment(self.dom, k) for k in range(self.K + 1)])

    @property
    def norms(self) -> np.ndarray:
        """m_k = ||z^k||^2."""
        return np.exp(self.log_norms)

    def __call__(self, z) -> np.ndarray:
        """Values e_k(z), stacked along a new trailing axis of length K+1."""
        z = np.asarray(z, dtype=complex)
        k = np.arange(self.K + 1)
        return z[..., None] ** k * np.exp(-0.5 * self.log_norms)


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """Exact (K+1)x(K+1) compression of T_phi; ``entries[l, k] = <phi e_k, e_l>``."""

    entries: np.ndarray
    basis: FockBasis
    symbol: Symbol = field(repr=False)

    def adjoint(self) -> ToeplitzMatrix:
        return ToeplitzMatrix(self.entries.conj().T, self.basis, self.symbol.conj())

    def to_json(self) -> dict:
        return {
            "domain": self.basis.dom.to_json(),
            "K": self.basis.K,
            "symbol": self.symbol.to_json(),
            **matrix_to_json(self.entries),
        }

    def to_csv(self) -> str:
        return matrix_to_csv(self.entries)


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_to_csv(M) -> str:
    """Row-major CSV; each entry contributes a ``re,im`` pair."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    buf = io.StringIO()
    for row in M:
        buf.write(",".join(f"{float(x.real)!r},{float(x.imag)!r}" for x in row))
        buf.write("\n")
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        vals = [float(x) for x in line.split(",")]
        rows.append([complex(r, i) for r, i in zip(vals[::2], vals[1::2])])
    return np.array(rows, dtype=complex)


def toeplitz_matrix(phi: Symbol, basis: FockBasis) -> ToeplitzMatrix:
    """Compression of T_phi to span{e_0..e_K} from closed-form moments."""
    if phi.num_vars != 1:
        raise ValueError("toeplitz_matrix expects a 1-variable symbol")
    dom = basis.dom
    if dom.kind == "disc" and any(c for _, _, c in phi.terms):
        raise ValueError("unsupported symbol class: disc needs pure polynomials (c = 0)")
    K = basis.K
    M = np.zeros((K + 1, K + 1), dtype=complex)
    logm = basis.log_norms
    for ((a,), (b,), c), coef in phi:
        k = np.arange(max(0, b - a), min(K, K + b - a) + 1)
        if k.size == 0:
            continue
        l = k + a - b
        logM = np.array([log_moment(dom, int(j), float(c)) for j in k + a])
        M[l, k] += coef * np.exp(logM - 0.5 * (logm[k] + logm[l]))
    return ToeplitzMatrix(M, basis, phi)


def op_norm(M) -> float:
    """Largest singular value via a Hermitian eigensolve of M* M."""
    M = np.asarray(getattr(M, "entries", M), dtype=complex)
    if M.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(M.conj().T @ M)
    return float(np.sqrt(max(w[-1], 0.0)))


def effective_block(M, margin: int) -> np.ndarray:
    """Top-left (K+1-margin) square block, free of truncation-edge artifacts."""
    M = np.asarray(getattr(M, "entries", M))
    size = M.shape[0]
    if margin < 0 or margin >= size:
        raise ValueError(f"margin {margin} must satisfy 0 <= margin < {size}")
    B = size - margin
    return M[:B, :B]


def default_truncation(dom: DomainSpec) -> int:
    """Degree needed to hold coherent mass of the whole unit region.

    Plane: max(16, ceil(8/h)).  Disc: the radius reached at degree k is
    kh/(1+kh), so the disc needs max(16, ceil(8/h^2)).
    """
    if dom.kind == "plane":
        return max(16, math.ceil(8 / dom.h))
    return max(16, math.ceil(8 / dom.h**2))

