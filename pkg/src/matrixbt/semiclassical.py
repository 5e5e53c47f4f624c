"""h-sweeps of semiclassical product expansions, with log-log order fits.

Residuals are operator norms of

    T_phi T_psi - sum_{r<=R} h^r T_{C_r(phi, psi)}

on the truncation-free block of exact Toeplitz compressions.  Matrix-side
checks go through the spectral and U-invariant reductions (tensoring with
the identity does not change operator norms), which are verified by Monte
Carlo separately in :mod:`matrixbt.hilbert`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fock import DomainSpec, FockBasis, default_truncation, effective_block, op_norm, toeplitz_matrix
from .symbols import Symbol, check_symmetric_tail, cochain_C, flat, pi_h, upsilon

EXACT_FLOOR = 1e-14
# residuals at or below this fraction of the product norm are roundoff
RELATIVE_FLOOR = 1e-12
DEFAULT_H_GRID = (0.1, 0.05, 0.02, 0.01)


def _expansion_operator(phi, psi, R, basis, sign, cochain=None):
    T = lambda s: toeplitz_matrix(s, basis).entries  # noqa: E731
    M = product = T(phi) @ T(psi)
    h = basis.dom.h
    for r in range(R + 1):
        C = cochain(r) if cochain is not None else cochain_C(r, phi, psi, sign)
        if not C.is_zero():
            M = M - h**r * T(C)
    return M, product


def _check_margin(margin, *symbols):
    need = sum(s.degree() for s in symbols)
    if margin < need:
        raise ValueError(f"margin {margin} too small for combined degree {need}")


def _residual(phi, psi, R, basis, margin, sign, cochain=None):
    M, scale = _expansion_operator(phi, psi, R, basis, sign, cochain)
    return op_norm(effective_block(M, margin)), op_norm(effective_block(scale, margin))


def residual_scalar(phi: Symbol, psi: Symbol, R: int, dom: DomainSpec, K: int = 24,
                    margin: int = 8, sign: int = -1) -> float:
    """|| T_phi T_psi - sum_{r<=R} h^r T_{C_r(phi,psi)} || on the effective block."""
    _check_margin(margin, phi, psi)
    return _residual(phi, psi, R, FockBasis(dom, K), margin, sign)[0]


def localized_truncation(dom: DomainSpec, radius2: float, margin: int) -> int:
    """K whose effective block reaches the coherent degree of |z|^2 = radius2.

    A coherent state at |z|^2 = t sits at degree t/h on the plane and at
    t/(h(1-t)) on the disc; keeping that region fixed while h -> 0 is what
    turns the block norm into a semiclassical quantity.
    """
    if dom.kind == "plane":
        B = math.ceil(radius2 / dom.h - 1e-9)
    else:
        if not 0 < radius2 < 1:
            raise ValueError("disc radius2 must lie in (0, 1)")
        B = math.ceil(radius2 / (dom.h * (1 - radius2)) - 1e-9)
    return B - 1 + margin


def order_fit(h_grid, residuals, floor: float = EXACT_FLOOR) -> float | None:
    """Least-squares slope of log(residual) against log(h).

    Returns ``None`` ("exact") when every residual is at or below ``floor``.
    """
    h = np.asarray(h_grid, dtype=float)
    r = np.asarray(residuals, dtype=float)
    if h.size < 3 or h.size != r.size or np.unique(h).size != h.size or np.any(h <= 0):
        raise ValueError("order_fit needs at least 3 distinct positive grid points")
    if np.all(r <= floor):
        return None
    if np.any(r <= floor):
        raise ValueError("residuals mix exact zeros with nonzero values; no slope defined")
    slope, _ = np.polyfit(np.log(h), np.log(r), 1)
    return float(slope)


def _fit(grid, residuals, scales) -> float | None:
    cleaned = [0.0 if r <= RELATIVE_FLOOR * max(1.0, s) else r for r, s in zip(residuals, scales)]
    return order_fit(grid, cleaned)


@dataclass
class Track:
    residuals: list[float]
    slope: float | None

    @property
    def exact(self) -> bool:
        return self.slope is None

    def meets(self, lo: float, hi: float = math.inf) -> bool:
        return self.exact or lo <= self.slope <= hi


@dataclass
class ExpansionReport:
    label: str
    R: int
    h_grid: list[float]
    tracks: dict[str, Track]
    expected_slope: int
    config: dict = field(default_factory=dict)

    @property
    def residuals(self) -> list[float]:
        return next(iter(self.tracks.values())).residuals

    @property
    def fitted_slope(self) -> float | None:
        return next(iter(self.tracks.values())).slope

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "R": self.R,
            "h_grid": list(self.h_grid),
            "expected_slope": self.expected_slope,
            "tracks": {
                k: {"residuals": t.residuals, "slope": t.slope, "exact": t.exact}
                for k, t in self.tracks.items()
            },
            "config": self.config,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def csv_rows(self):
        yield ["track", "h", "residual"]
        for name, t in self.tracks.items():
            for h, r in zip(self.h_grid, t.residuals):
                yield [name, repr(h), repr(r)]


def _grid(h_grid):
    grid = [float(h) for h in h_grid]
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("h_grid must be strictly decreasing")
    return grid


def expansion_check_spectral(phi: Symbol, psi: Symbol, R: int, dom: DomainSpec, N: int = 1,
                             h_grid=DEFAULT_H_GRID, K: int = 24, margin: int = 8,
                             sign: int = -1) -> ExpansionReport:
    """Order check for two spectral symbols.

    T_{phi^#} T_{psi^#} is unitarily T_phi T_psi (x) I, whose norm equals the
    scalar one, so the N-dependent check reduces exactly to ``residual_scalar``.
    """
    grid = _grid(h_grid)
    _check_margin(margin, phi, psi)
    pairs = [_residual(phi, psi, R, FockBasis(dom.with_h(h), K), margin, sign) for h in grid]
    res = [p[0] for p in pairs]
    return ExpansionReport(
        label=f"spectral[{phi!r} | {psi!r}]",
        R=R,
        h_grid=grid,
        tracks={"scalar": Track(res, _fit(grid, res, [p[1] for p in pairs]))},
        expected_slope=R + 1,
        config={"domain": dom.kind, "N": N, "K": K, "margin": margin, "sign": sign,
                "reduction": "T_phi# T_psi# = (T_phi T_psi) (x) I"},
    )


def expansion_check_u_invariant(phi: Symbol, psi: Symbol, R: int, dom: DomainSpec, N: int,
                                h_grid=DEFAULT_H_GRID, K: int = 24, margin: int = 8,
                                sign: int = -1) -> ExpansionReport:
    """Two residual tracks for U-invariant symbols with scalar representatives
    phi, psi in N variables.

    A: against sum h^r T_{C_r(pi_h phi, pi_h psi)} (pi_h at numeric h).
    B: against sum h^r T_{upsilon_r(phi, psi)}.
    A-B: norm of the difference of the two approximants.
    """
    for s in (phi, psi):
        if s.num_vars != N:
            raise ValueError(f"symbol has {s.num_vars} variables, expected N={N}")
        if N >= 2 and not check_symmetric_tail(s):
            raise ValueError("symbols must be symmetric in their last N-1 variables")
    if dom.kind != "plane" or any(c for s in (phi, psi) for _, _, c in s.terms):
        raise ValueError("the upsilon track needs plane domain and pure polynomials")
    grid = _grid(h_grid)
    ups = [upsilon(r, phi, psi, sign) for r in range(R + 1)]
    tracks = {"A": [], "B": [], "A-B": []}
    scales = []
    for h in grid:
        d = dom.with_h(h)
        a, b = pi_h(phi, d, N), pi_h(psi, d, N)
        _check_margin(margin, a, b)
        basis = FockBasis(d, K)
        MA, P = _expansion_operator(a, b, R, basis, sign)
        MB, _ = _expansion_operator(a, b, R, basis, sign, cochain=lambda r: ups[r])
        tracks["A"].append(op_norm(effective_block(MA, margin)))
        tracks["B"].append(op_norm(effective_block(MB, margin)))
        tracks["A-B"].append(op_norm(effective_block(MA - MB, margin)))
        scales.append(op_norm(effective_block(P, margin)))
    return ExpansionReport(
        label=f"u-invariant[{phi!r} | {psi!r}]",
        R=R,
        h_grid=grid,
        tracks={k: Track(v, _fit(grid, v, scales)) for k, v in tracks.items()},
        expected_slope=R + 1,
        config={"domain": dom.kind, "N": N, "K": K, "margin": margin, "sign": sign,
                "flat_phi": flat(phi).to_json(), "flat_psi": flat(psi).to_json()},
    )


def expansion_check_localized(phi: Symbol, psi: Symbol, R: int, dom: DomainSpec,
                              h_grid=DEFAULT_H_GRID, radius2: float = 1.0, margin: int = 8,
                              sign: int = -1) -> ExpansionReport:
    """Like :func:`expansion_check_spectral`, but the effective block tracks
    a fixed phase-space region |z|^2 <= radius2 instead of a fixed degree.

    With a fixed K the block shrinks to the origin as h -> 0 and the residual
    of a degree-D pair scales like h^(D/2) whatever R is; a fixed region
    restores the h^(R+1) behaviour.
    """
    grid = _grid(h_grid)
    _check_margin(margin, phi, psi)
    res, scales, Ks = [], [], []
    for h in grid:
        d = dom.with_h(h)
        K = localized_truncation(d, radius2, margin)
        r, sc = _residual(phi, psi, R, FockBasis(d, K), margin, sign)
        res.append(r)
        scales.append(sc)
        Ks.append(K)
    return ExpansionReport(
        label=f"localized[{phi!r} | {psi!r}]",
        R=R,
        h_grid=grid,
        tracks={"scalar": Track(res, _fit(grid, res, scales))},
        expected_slope=R + 1,
        config={"domain": dom.kind, "radius2": radius2, "K": Ks, "margin": margin, "sign": sign},
    )


# ---------------------------------------------------------------------------
# norm limits


def sup_norm_grid(phi: Symbol, dom: DomainSpec, radius: float = 6.0, n: int = 801) -> float:
    """Grid estimate of sup |phi| (over the square [-radius, radius]^2 for the
    plane, over the closed unit disc for the disc)."""
    if dom.kind == "disc":
        radius = 1.0
    x = np.linspace(-radius, radius, n)
    zz = x[:, None] + 1j * x[None, :]
    if dom.kind == "disc":
        zz = zz[np.abs(zz) <= 1.0]
    return float(np.max(np.abs(phi(zz))))


def sup_norm_limit(phi: Symbol, dom: DomainSpec, h_grid, K=None) -> list[dict]:
    """Table of (h, ||T_phi||, ||phi||_inf, gap) along ``h_grid``."""
    sup = sup_norm_grid(phi, dom)
    rows = []
    for h in _grid(h_grid):
        d = dom.with_h(h)
        Kh = default_truncation(d) if K is None else K
        norm = op_norm(toeplitz_matrix(phi, FockBasis(d, Kh)))
        rows.append({"h": h, "K": Kh, "op_norm": norm, "sup_norm": sup, "gap": sup - norm})
    return rows


def decay_table(h_grid=(0.4, 0.2, 0.1, 0.05), N: int = 2) -> dict:
    """Norm decay of the quantized |det Z|^2 e^{-Tr Z^*Z} I on the plane.

    Through the U-invariant reduction the operator is T_{pi_h phi} (x) I with
    pi_h phi = (h/(1+h)^2)^{N-1} |z|^2 e^{-|z|^2}.
    """
    one = (1,) * N
    phi = Symbol.monomial(one, one, c=1)
    grid = _grid(h_grid)
    norms, oracle = [], []
    for h in grid:
        d = DomainSpec("plane", h)
        reduced = pi_h(phi, d, N)
        norms.append(op_norm(toeplitz_matrix(reduced, FockBasis(d, default_truncation(d)))))
        oracle.append(math.exp(-1) * (h / (1 + h) ** 2) ** (N - 1))
    return {
        "h_grid": grid,
        "op_norms": norms,
        "sup_norm_oracle": oracle,
        "slope": order_fit(grid, norms),
        "oracle_slope": order_fit(grid, oracle),
    }


def sign_probe(h: float = 0.1, K: int = 24, margin: int = 2) -> dict:
    """Residual of T_z T_zbar - T_{|z|^2} - h*C_1 term under both signs."""
    dom = DomainSpec("plane", h)
    z, zb = Symbol.z(), Symbol.zbar()
    res = {s: residual_scalar(z, zb, 1, dom, K, margin, s) for s in (-1, 1)}
    working = min(res, key=res.get)
    return {"h": h, "K": K, "margin": margin,
            "residual_minus": res[-1], "residual_plus": res[1], "working_sign": working}
