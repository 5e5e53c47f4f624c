import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixbt.fock import DomainSpec
from matrixbt.symbols import (
    Symbol,
    SymbolParseError,
    check_symmetric_tail,
    cochain_C,
    cochain_series,
    d_z,
    d_zbar,
    flat,
    laplacian_prime,
    pi_h,
    pi_h_series,
    poisson,
    series_eval,
    sym_add,
    sym_mul,
    upsilon,
    upsilon_series,
)

z, zb = Symbol.z(), Symbol.zbar()
PLANE = DomainSpec("plane", 0.3)
DISC = DomainSpec("disc", 0.3)


def symbols(num_vars=1, max_deg=4, gaussian=True, max_terms=4):
    """Random polynomial x Gaussian symbols with small integer coefficients."""
    exps = st.lists(st.integers(0, 2), min_size=num_vars, max_size=num_vars)
    coef = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
    rate = st.sampled_from([0, Fraction(1, 2), 1] if gaussian else [0])

    @st.composite
    def build(draw):
        terms = {}
        for _ in range(draw(st.integers(0, max_terms))):
            a, b = draw(exps), draw(exps)
            if sum(a) + sum(b) > max_deg:
                continue
            re, im = draw(coef)
            key = (tuple(a), tuple(b), draw(rate))
            terms[key] = terms.get(key, 0) + complex(re, im)
        return Symbol(num_vars, terms)

    return build()


def rand_points(nv, n=100, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, nv)) + 1j * rng.normal(size=(n, nv))


# construction and arithmetic ----------------------------------------------


def test_monomial_product():
    s = z * zb
    assert s == Symbol.abs2()
    assert list(s.terms) == [((1,), (1,), 0)]


def test_gaussian_rates_add():
    g = Symbol.gaussian(1) * Symbol.gaussian(1)
    assert list(g.terms) == [((0,), (0,), 2)]


def test_difference_of_squares():
    assert (z + 1) * (z - 1) == z**2 - 1


def test_zero_terms_dropped():
    s = z - z
    assert s.is_zero() and len(s) == 0


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        Symbol.gaussian(-1)


def test_evaluation_formula():
    s = Symbol.monomial((2, 0), (1, 1), c=Fraction(1, 2), coef=3 - 1j)
    p = rand_points(2, 10)
    expect = (3 - 1j) * p[:, 0] ** 2 * p[:, 0].conj() * p[:, 1].conj() * np.exp(-0.5 * np.sum(abs(p) ** 2, axis=1))
    np.testing.assert_allclose(s(p), expect, rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(symbols(2), symbols(2))
def test_canonical_and_pointwise(a, b):
    p = rand_points(2)
    for op, f in ((sym_add, np.add), (sym_mul, np.multiply)):
        s = op(a, b)
        keys = list(s.terms)
        assert len(keys) == len(set(keys))
        assert all(v != 0 for v in s.terms.values())
        assert all(c >= 0 and len(al) == 2 and len(be) == 2 for al, be, c in keys)
        got, want = s(p), f(a(p), b(p))
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(want), initial=0)))


# derivatives ----------------------------------------------------------------


def test_derivative_examples():
    assert d_z(z**2) == 2 * z
    g = Symbol.gaussian(1)
    assert d_z(g) == -1 * zb * g
    assert d_zbar(z).is_zero()


@settings(max_examples=60, deadline=None)
@given(symbols(2), symbols(2), st.sampled_from([1, 2]))
def test_leibniz(a, b, m):
    assert d_z(a * b, m).isclose(d_z(a, m) * b + a * d_z(b, m))
    assert d_zbar(a * b, m).isclose(d_zbar(a, m) * b + a * d_zbar(b, m))


def test_derivative_bad_variable():
    with pytest.raises(ValueError):
        d_z(z, 2)


# Poisson bracket and cochains ----------------------------------------------


def test_poisson_examples():
    assert poisson(z, zb).isclose(Symbol.const(2 * math.pi / 1j))
    assert poisson(z, z).is_zero()


def test_cochain_examples():
    assert cochain_C(1, z, zb, sign=+1) == Symbol.const(1)
    assert cochain_C(1, z, zb, sign=-1) == Symbol.const(-1)
    a, b = z**2 + 3 * zb, zb * z
    assert cochain_C(0, a, b) == a * b
    assert cochain_C(2, z**2, zb**2, sign=+1) == Symbol.const(2)
    lhs = cochain_C(1, z**2, zb) - cochain_C(1, zb, z**2)
    assert lhs.isclose(-1 * (1j / (2 * math.pi)) * poisson(z**2, zb))


@settings(max_examples=50, deadline=None)
@given(symbols(2), symbols(2), st.sampled_from([-1, 1]))
def test_c1_antisymmetry(a, b, sign):
    lhs = cochain_C(1, a, b, sign) - cochain_C(1, b, a, sign)
    rhs = sign * (1j / (2 * math.pi)) * poisson(a, b)
    assert lhs.isclose(rhs, atol=1e-10)


def test_cochain_restricted_variables():
    a = Symbol.z(1, 2) * Symbol.z(2, 2)
    b = Symbol.zbar(1, 2) * Symbol.zbar(2, 2)
    only_first = cochain_C(1, a, b, sign=1, variables=[1])
    assert only_first == Symbol.abs2(2, 2)
    both = cochain_C(1, a, b, sign=1)
    assert both == Symbol.abs2(1, 2) + Symbol.abs2(2, 2)


# flat, primed Laplacian, upsilon -------------------------------------------


def test_flat_examples():
    assert flat(Symbol.abs2(2, 2)).is_zero()
    assert flat(Symbol.z(1, 2) + Symbol.z(1, 2) * Symbol.abs2(2, 2)) == z
    g = Symbol.abs2(1, 2) * Symbol.abs2(2, 2) * Symbol.gaussian(1, 2)
    assert flat(g).is_zero()
    assert flat(Symbol.gaussian(1, 2)) == Symbol.gaussian(1)


def test_laplacian_prime_examples():
    assert laplacian_prime(Symbol.abs2(2, 2)) == Symbol.const(1, 2)
    assert laplacian_prime(Symbol.z(1, 2)).is_zero()
    assert laplacian_prime(Symbol.abs2(2, 2) ** 2) == 4 * Symbol.abs2(2, 2)


def test_upsilon_examples():
    a = Symbol.abs2(2, 2) + Symbol.z(1, 2)
    b = Symbol.zbar(1, 2) * 2
    assert upsilon(0, a, b) == flat(a) * flat(b)
    assert upsilon(1, Symbol.abs2(2, 2), Symbol.const(1, 2)) == Symbol.const(1)
    assert upsilon(1, Symbol.z(1, 2), Symbol.zbar(1, 2), sign=+1) == Symbol.const(1)
    assert upsilon(1, Symbol.z(1, 2), Symbol.zbar(1, 2), sign=-1) == Symbol.const(-1)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3).flatmap(lambda nv: st.tuples(symbols(nv, 3, False), symbols(nv, 3, False))),
       st.integers(0, 3), st.sampled_from([-1, 1]))
def test_upsilon_consistency(pair, R, sign):
    a, b = pair
    lhs = cochain_series(R, pi_h_series(a), pi_h_series(b), sign)
    rhs = upsilon_series(R, a, b, sign)
    for p in range(R + 1):
        assert (lhs[p] - rhs[p]).is_zero()


# symmetric tails and pi_h ---------------------------------------------------


def test_symmetric_tail_examples():
    assert check_symmetric_tail(Symbol.abs2(2, 3) + Symbol.abs2(3, 3))
    assert not check_symmetric_tail(Symbol.z(2, 3))
    assert check_symmetric_tail(Symbol.z(1, 3) * Symbol.abs2(2, 3) * Symbol.abs2(3, 3))


def test_pi_h_examples():
    h = PLANE.h
    assert pi_h(Symbol.abs2(2, 2), PLANE).isclose(Symbol.const(h))
    assert pi_h(Symbol.abs2(1, 2) * Symbol.abs2(2, 2), PLANE).isclose(h * Symbol.abs2())
    g = Symbol.abs2(1, 2) * Symbol.abs2(2, 2) * Symbol.gaussian(1, 2)
    assert pi_h(g, PLANE).isclose(h / (1 + h) ** 2 * Symbol.abs2() * Symbol.gaussian(1))


@pytest.mark.parametrize("dom", [PLANE, DISC])
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_pi_h_normalization(dom, N):
    assert pi_h(Symbol.const(1, N), dom, N) == Symbol.const(1)


def test_pi_h_disc_moment():
    # int |w|^4 dmu_h on the disc = 2h^2/(1+h)
    h = DISC.h
    got = pi_h(Symbol.abs2(2, 2) ** 2, DISC)
    assert got.isclose(Symbol.const(2 * h**2 / (1 + h)))


def test_pi_h_disc_rejects_gaussian():
    with pytest.raises(ValueError):
        pi_h(Symbol.gaussian(1, 2), DISC)


@settings(max_examples=30, deadline=None)
@given(symbols(1))
def test_pi_h_spectral_reduction(s):
    lifted = Symbol(3, {((a[0], 0, 0), (b[0], 0, 0), c): v for (a, b, c), v in s})
    # Gaussian damping in the internal variables is not "depending only on d_1"
    if any(c for _, _, c in s.terms):
        return
    assert pi_h(lifted, PLANE) == s


def test_pi_h_series_matches_numeric():
    s = Symbol.z(1, 3) * Symbol.abs2(2, 3) * Symbol.abs2(3, 3) + 2 * Symbol.abs2(2, 3) ** 2
    for h in (0.1, 0.37):
        assert series_eval(pi_h_series(s), h).isclose(pi_h(s, DomainSpec("plane", h)))


# serialization --------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(symbols(2))
def test_json_round_trip(s):
    text = json.dumps(s.to_json())
    assert Symbol.from_json(text) == s
    assert Symbol.from_json(json.loads(text)) == s


def test_parse_error_location():
    with pytest.raises(SymbolParseError) as err:
        Symbol.from_json('{"num_vars": 1,\n "terms": [}')
    assert "line 2" in str(err.value)


def test_parse_error_schema():
    with pytest.raises(SymbolParseError):
        Symbol.from_json({"num_vars": 1, "terms": [{"re": 1, "im": 0, "alpha": [1, 2], "beta": [0]}]})
