"""Exact algebra of polynomial x Gaussian symbols in several complex variables.

A :class:`Symbol` is a finite sum of terms

    coef * prod_m z_m**alpha_m * conj(z_m)**beta_m * exp(-c * sum_m |z_m|**2)

with a rational, nonnegative Gaussian rate ``c``.  The class is closed under
products and Wirtinger derivatives and its Gaussian integrals are known in
closed form, which makes every quantity built from it exact up to floating
point.  Variable 1 (index 0) is the kinematic slot; variables 2..N are the
internal slots.
"""

from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Key = tuple[tuple[int, ...], tuple[int, ...], Fraction]


class SymbolParseError(ValueError):
    """Raised when a JSON symbol cannot be decoded."""


def _as_rate(c) -> Fraction:
    rate = Fraction(c).limit_denominator(10**9) if isinstance(c, float) else Fraction(c)
    if rate < 0:
        raise ValueError(f"Gaussian rate must be nonnegative, got {rate}")
    return rate


class Symbol:
    """Immutable polynomial x Gaussian symbol in canonical form."""

    __slots__ = ("_num_vars", "_terms")

    def __init__(self, num_vars: int, terms: Mapping[Key, complex] | Iterable = ()):
        if int(num_vars) < 1:
            raise ValueError("num_vars must be positive")
        self._num_vars = int(num_vars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Key, complex] = {}
        for key, coef in items:
            alpha, beta, c = key
            alpha = tuple(int(a) for a in alpha)
            beta = tuple(int(b) for b in beta)
            if len(alpha) != self._num_vars or len(beta) != self._num_vars:
                raise ValueError("exponent vectors must have length num_vars")
            if min(alpha + beta) < 0:
                raise ValueError("exponents must be nonnegative")
            k = (alpha, beta, _as_rate(c))
            acc[k] = acc.get(k, 0j) + complex(coef)
        self._terms = {k: v for k, v in sorted(acc.items()) if v != 0}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def const(cls, value: complex, num_vars: int = 1) -> Symbol:
        zero = (0,) * num_vars
        return cls(num_vars, {(zero, zero, Fraction(0)): value})

    @classmethod
    def monomial(cls, alpha, beta, c=0, coef: complex = 1.0) -> Symbol:
        alpha, beta = tuple(alpha), tuple(beta)
        return cls(len(alpha), {(alpha, beta, _as_rate(c)): coef})

    @classmethod
    def z(cls, m: int = 1, num_vars: int = 1) -> Symbol:
        """The coordinate z_m (1-based)."""
        alpha = tuple(int(i == m - 1) for i in range(num_vars))
        return cls.monomial(alpha, (0,) * num_vars)

    @classmethod
    def zbar(cls, m: int = 1, num_vars: int = 1) -> Symbol:
        beta = tuple(int(i == m - 1) for i in range(num_vars))
        return cls.monomial((0,) * num_vars, beta)

    @classmethod
    def abs2(cls, m: int = 1, num_vars: int = 1) -> Symbol:
        """|z_m|**2."""
        e = tuple(int(i == m - 1) for i in range(num_vars))
        return cls.monomial(e, e)

    @classmethod
    def gaussian(cls, c, num_vars: int = 1) -> Symbol:
        """exp(-c * sum_m |z_m|**2)."""
        zero = (0,) * num_vars
        return cls(num_vars, {(zero, zero, _as_rate(c)): 1.0})

    # -- basic protocol -------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return self._num_vars

    @property
    def terms(self) -> dict[Key, complex]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Maximal total degree |alpha| + |beta| (the Gaussian factor does not count)."""
        return max((sum(a) + sum(b) for a, b, _ in self._terms), default=0)

    def __repr__(self) -> str:
        if not self._terms:
            return f"Symbol({self._num_vars}, 0)"
        parts = []
        for (a, b, c), coef in self._terms.items():
            s = f"({coef:.6g})"
            for m in range(self._num_vars):
                if a[m]:
                    s += f"*z{m + 1}^{a[m]}"
                if b[m]:
                    s += f"*zb{m + 1}^{b[m]}"
            if c:
                s += f"*exp(-{c}|z|^2)"
            parts.append(s)
        return " + ".join(parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Symbol):
            return NotImplemented
        return self._num_vars == other._num_vars and self._terms == other._terms

    def __hash__(self):
        return hash((self._num_vars, tuple(self._terms.items())))

    def isclose(self, other: Symbol, atol: float = 1e-12, rtol: float = 1e-12) -> bool:
        """Termwise comparison with a floating tolerance on coefficients."""
        if self._num_vars != other._num_vars:
            return False
        keys = set(self._terms) | set(other._terms)
        for k in keys:
            a = self._terms.get(k, 0j)
            b = other._terms.get(k, 0j)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> Symbol:
        if isinstance(other, Symbol):
            if other._num_vars != self._num_vars:
                raise ValueError(
                    f"variable-count mismatch: {self._num_vars} vs {other._num_vars}"
                )
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Symbol.const(other, self._num_vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Symbol(self._num_vars, itertools.chain(self, other))

    __radd__ = __add__

    def __neg__(self):
        return Symbol(self._num_vars, ((k, -v) for k, v in self))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Symbol(self._num_vars, ((k, v * other) for k, v in self))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = []
        for (a1, b1, c1), v1 in self:
            for (a2, b2, c2), v2 in other:
                a = tuple(x + y for x, y in zip(a1, a2))
                b = tuple(x + y for x, y in zip(b1, b2))
                out.append(((a, b, c1 + c2), v1 * v2))
        return Symbol(self._num_vars, out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, p: int):
        out = Symbol.const(1.0, self._num_vars)
        for _ in range(int(p)):
            out = out * self
        return out

    def conj(self) -> Symbol:
        """Pointwise complex conjugate."""
        return Symbol(self._num_vars, (((b, a, c), v.conjugate()) for (a, b, c), v in self))

    # -- evaluation -----------------------------------------------------------

    def __call__(self, points) -> np.ndarray:
        """Evaluate at ``points`` of shape (..., num_vars); a 1-variable symbol
        also accepts a plain array of complex numbers."""
        pts = np.asarray(points, dtype=complex)
        if self._num_vars == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        if pts.shape[-1] != self._num_vars:
            raise ValueError("last axis of points must have length num_vars")
        r2 = np.sum(np.abs(pts) ** 2, axis=-1)
        conj = pts.conj()
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for (a, b, c), v in self:
            term = np.full(pts.shape[:-1], v, dtype=complex)
            for m in range(self._num_vars):
                if a[m]:
                    term = term * pts[..., m] ** a[m]
                if b[m]:
                    term = term * conj[..., m] ** b[m]
            if c:
                term = term * np.exp(-float(c) * r2)
            out = out + term
        return out

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "num_vars": self._num_vars,
            "terms": [
                {
                    "re": v.real,
                    "im": v.imag,
                    "alpha": list(a),
                    "beta": list(b),
                    "c_num": c.numerator,
                    "c_den": c.denominator,
                }
                for (a, b, c), v in self
            ],
        }

    @classmethod
    def from_json(cls, data) -> Symbol:
        """Build from a dict or a JSON string; errors carry the failing location."""
        if isinstance(data, (str, bytes)):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise SymbolParseError(
                    f"malformed symbol JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from exc
        try:
            num_vars = int(data["num_vars"])
            raw_terms = data["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SymbolParseError(f"symbol: missing or invalid field {exc}") from exc
        terms = []
        for i, t in enumerate(raw_terms):
            try:
                coef = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
                c = Fraction(int(t.get("c_num", 0)), int(t.get("c_den", 1)))
                terms.append(((tuple(t["alpha"]), tuple(t["beta"]), c), coef))
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise SymbolParseError(f"symbol: terms[{i}]: {exc!r}") from exc
        try:
            return cls(num_vars, terms)
        except ValueError as exc:
            raise SymbolParseError(f"symbol: {exc}") from exc


# ---------------------------------------------------------------------------
# calculus


def sym_add(a: Symbol, b: Symbol) -> Symbol:
    return a + b


def sym_mul(a: Symbol, b: Symbol) -> Symbol:
    return a * b


def _check_var(s: Symbol, m: int):
    if not 1 <= m <= s.num_vars:
        raise ValueError(f"variable index {m} outside 1..{s.num_vars}")


def d_z(s: Symbol, m: int = 1) -> Symbol:
    """Wirtinger derivative d/dz_m (1-based)."""
    _check_var(s, m)
    i = m - 1
    out = []
    for (a, b, c), v in s:
        if a[i]:
            a2 = a[:i] + (a[i] - 1,) + a[i + 1:]
            out.append(((a2, b, c), v * a[i]))
        if c:
            # d/dz exp(-c|z|^2) = -c zbar exp(-c|z|^2)
            b2 = b[:i] + (b[i] + 1,) + b[i + 1:]
            out.append(((a, b2, c), -v * float(c)))
    return Symbol(s.num_vars, out)


def d_zbar(s: Symbol, m: int = 1) -> Symbol:
    """Wirtinger derivative d/dzbar_m (1-based)."""
    _check_var(s, m)
    i = m - 1
    out = []
    for (a, b, c), v in s:
        if b[i]:
            b2 = b[:i] + (b[i] - 1,) + b[i + 1:]
            out.append(((a, b2, c), v * b[i]))
        if c:
            a2 = a[:i] + (a[i] + 1,) + a[i + 1:]
            out.append(((a2, b, c), -v * float(c)))
    return Symbol(s.num_vars, out)


def poisson(a: Symbol, b: Symbol) -> Symbol:
    """{a, b} = (2 pi / i) sum_m (da/dz_m db/dzbar_m - db/dz_m da/dzbar_m).

    The constant is chosen so that C_1(a, b) - C_1(b, a) = sign * (i / 2 pi) {a, b}.
    """
    if a.num_vars != b.num_vars:
        raise ValueError("variable-count mismatch")
    acc = Symbol(a.num_vars)
    for m in range(1, a.num_vars + 1):
        acc = acc + d_z(a, m) * d_zbar(b, m) - d_z(b, m) * d_zbar(a, m)
    return acc * (2 * math.pi / 1j)


def _multi_indices(r: int, variables: list[int]):
    for combo in itertools.combinations_with_replacement(variables, r):
        counts: dict[int, int] = {}
        for m in combo:
            counts[m] = counts.get(m, 0) + 1
        yield counts


def cochain_C(r: int, a: Symbol, b: Symbol, sign: int = -1, variables=None) -> Symbol:
    """sign**r * sum_{|alpha|=r} (1/alpha!) d^alpha a * dbar^alpha b.

    ``variables`` lists the 1-based variables the multi-index runs over
    (default: all).  ``sign=-1`` matches the Gaussian measure e^{-|z|^2/h}/(pi h).
    """
    if a.num_vars != b.num_vars:
        raise ValueError("variable-count mismatch")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if r < 0:
        raise ValueError("r must be nonnegative")
    variables = list(range(1, a.num_vars + 1)) if variables is None else list(variables)
    acc = Symbol(a.num_vars)
    for counts in _multi_indices(r, variables):
        da, db = a, b
        fact = 1
        for m, k in counts.items():
            fact *= math.factorial(k)
            for _ in range(k):
                da = d_z(da, m)
                db = d_zbar(db, m)
        acc = acc + (da * db) * (1.0 / fact)
    return acc * float(sign**r)


def flat(s: Symbol) -> Symbol:
    """Restriction z_2 = ... = z_N = 0; returns a 1-variable symbol."""
    out = []
    for (a, b, c), v in s:
        if any(a[1:]) or any(b[1:]):
            continue
        out.append((((a[0],), (b[0],), c), v))
    return Symbol(1, out)


def laplacian_prime(s: Symbol) -> Symbol:
    """sum_{m>=2} d/dz_m d/dzbar_m (the quarter-Laplacian in the internal slots)."""
    if s.num_vars < 2:
        raise ValueError("laplacian_prime needs at least 2 variables")
    acc = Symbol(s.num_vars)
    for m in range(2, s.num_vars + 1):
        acc = acc + d_z(d_zbar(s, m), m)
    return acc


def _lap_power(s: Symbol, j: int) -> Symbol:
    if s.num_vars < 2:
        return s if j == 0 else Symbol(s.num_vars)
    for _ in range(j):
        s = laplacian_prime(s)
    return s


def upsilon(r: int, a: Symbol, b: Symbol, sign: int = -1) -> Symbol:
    """sum_{j+k+l=r} 1/(j!k!l!) * sign**l * d^l (L'^j a)_flat * dbar^l (L'^k b)_flat."""
    if a.num_vars != b.num_vars:
        raise ValueError("variable-count mismatch")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    acc = Symbol(1)
    for j in range(r + 1):
        fa = flat(_lap_power(a, j))
        for k in range(r - j + 1):
            l = r - j - k
            fb = flat(_lap_power(b, k))
            da, db = fa, fb
            for _ in range(l):
                da = d_z(da, 1)
                db = d_zbar(db, 1)
            w = sign**l / (math.factorial(j) * math.factorial(k) * math.factorial(l))
            acc = acc + (da * db) * float(w)
    return acc


def check_symmetric_tail(s: Symbol, atol: float = 1e-12) -> bool:
    """True iff ``s`` is invariant under permutations of variables 2..N."""
    if s.num_vars < 2:
        raise ValueError("check_symmetric_tail needs at least 2 variables")
    n = s.num_vars
    for i in range(1, n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        swapped = Symbol(
            n,
            (
                ((tuple(a[p] for p in perm), tuple(b[p] for p in perm), c), v)
                for (a, b, c), v in s
            ),
        )
        if not swapped.isclose(s, atol=atol, rtol=atol):
            return False
    return True


# ---------------------------------------------------------------------------
# internal averaging


def pi_h(s: Symbol, dom, N: int | None = None) -> Symbol:
    """Integrate variables 2..N out against the probability measure of ``dom``.

    Returns a symbol in variable 1 that keeps each term's Gaussian rate.
    """
    from .fock import moment

    N = s.num_vars if N is None else N
    if s.num_vars != N:
        raise ValueError(f"symbol has {s.num_vars} variables, expected N={N}")
    if dom.kind == "disc" and any(c for _, _, c in s.terms):
        raise ValueError("disc domain supports only pure polynomial symbols (c = 0)")
    out = []
    for (a, b, c), v in s:
        w = complex(v)
        for m in range(1, N):
            if a[m] != b[m]:
                w = 0.0
                break
            w *= moment(dom, a[m], b[m], float(c))
        if w:
            out.append((((a[0],), (b[0],), c), w))
    return Symbol(1, out)


HSeries = dict  # power of h -> Symbol


def pi_h_series(s: Symbol) -> dict[int, Symbol]:
    """Plane averaging with h kept symbolic: {power: coefficient symbol}.

    Uses int |w|^{2a} dmu_h = a! h^a; requires c = 0 throughout.
    """
    if any(c for _, _, c in s.terms):
        raise ValueError("pi_h_series requires pure polynomial symbols (c = 0)")
    buckets: dict[int, list] = {}
    for (a, b, c), v in s:
        if any(a[m] != b[m] for m in range(1, s.num_vars)):
            continue
        power = sum(a[1:])
        w = v * math.prod(math.factorial(x) for x in a[1:])
        buckets.setdefault(power, []).append((((a[0],), (b[0],), c), w))
    return {p: Symbol(1, t) for p, t in sorted(buckets.items())}


def series_eval(series: dict[int, Symbol], h: float) -> Symbol:
    acc = Symbol(1)
    for p, sym in series.items():
        acc = acc + sym * float(h**p)
    return acc


def cochain_series(R: int, sa: dict[int, Symbol], sb: dict[int, Symbol], sign: int = -1):
    """Coefficients of sum_{r<=R} h^r C_r(sa, sb) through order h^R."""
    out: dict[int, Symbol] = {}
    for r in range(R + 1):
        for j, A in sa.items():
            for k, B in sb.items():
                p = r + j + k
                if p > R:
                    continue
                out[p] = out.get(p, Symbol(1)) + cochain_C(r, A, B, sign)
    return {p: out.get(p, Symbol(1)) for p in range(R + 1)}


def upsilon_series(R: int, a: Symbol, b: Symbol, sign: int = -1):
    return {r: upsilon(r, a, b, sign) for r in range(R + 1)}
