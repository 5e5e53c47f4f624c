import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixbt.fock import DomainSpec
from matrixbt.semiclassical import (
    DEFAULT_H_GRID,
    decay_table,
    expansion_check_localized,
    expansion_check_spectral,
    expansion_check_u_invariant,
    order_fit,
    residual_scalar,
    sign_probe,
    sup_norm_limit,
)
from matrixbt.symbols import Symbol

z, zb, r2 = Symbol.z(), Symbol.zbar(), Symbol.abs2()
PLANE = DomainSpec("plane", 0.1)


def test_order_fit_synthetic():
    h = np.array(DEFAULT_H_GRID)
    assert order_fit(h, 3 * h**2) == pytest.approx(2.0, abs=1e-10)
    assert order_fit(h, 0.7 * h**3.5) == pytest.approx(3.5, abs=1e-10)
    assert order_fit(h, np.full(4, 0.2)) == pytest.approx(0.0, abs=1e-12)
    assert order_fit(h, np.zeros(4)) is None
    with pytest.raises(ValueError):
        order_fit(h, [1.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        order_fit([0.1, 0.1, 0.05], [1, 2, 3])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.5, 4))
def test_order_fit_recovers_power(c, p):
    h = np.array(DEFAULT_H_GRID)
    assert order_fit(h, c * h**p) == pytest.approx(p, abs=1e-9)


def test_residual_examples():
    assert residual_scalar(z, zb, 1, PLANE, sign=-1) <= 1e-12
    assert residual_scalar(zb, z, 0, PLANE) <= 1e-12
    assert residual_scalar(z, zb, 1, PLANE, sign=+1) == pytest.approx(2 * PLANE.h, rel=1e-10)
    with pytest.raises(ValueError):
        residual_scalar(z**3, zb**3, 0, PLANE, margin=4)


def test_sign_probe():
    res = sign_probe(0.1)
    assert res["working_sign"] == -1
    assert res["residual_minus"] <= 1e-12
    assert res["residual_plus"] == pytest.approx(0.2, rel=1e-10)


def test_z_zbar_order_one():
    rep = expansion_check_spectral(z, zb, 0, PLANE)
    assert rep.fitted_slope == pytest.approx(1.0, abs=0.15)


def test_z2_zbar2_second_order():
    rep = expansion_check_spectral(z**2, zb**2, 1, PLANE)
    assert rep.fitted_slope == pytest.approx(2.0, abs=0.15)


def test_constant_pair_is_exact():
    for R in range(3):
        rep = expansion_check_spectral(Symbol.const(1), Symbol.const(1), R, PLANE)
        assert rep.tracks["scalar"].exact
        assert max(rep.residuals) <= 1e-14


def test_sign_plus_slope_one():
    rep = expansion_check_spectral(z, zb, 1, PLANE, sign=+1)
    assert rep.fitted_slope == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("pair", [(z**2, zb**2), (r2, r2), (z + zb, z * zb)])
def test_residuals_monotone_in_R(pair):
    for h in DEFAULT_H_GRID:
        dom = PLANE.with_h(h)
        res = [residual_scalar(*pair, R, dom) for R in range(4)]
        assert all(b <= a * (1 + 1e-9) + 1e-13 for a, b in zip(res, res[1:]))


@pytest.mark.parametrize("pair", [(z**2, zb**2), (r2, r2), (z + zb, z * zb)])
def test_localized_block_orders(pair):
    # a fixed phase-space region gives the h^(R+1) law for every pair
    for R in (0, 1):
        tr = expansion_check_localized(*pair, R, PLANE).tracks["scalar"]
        assert tr.meets(R + 0.85, R + 1.3), (R, tr)


def test_u_invariant_constant_pair():
    phi = Symbol.abs2(2, 2)
    rep = expansion_check_u_invariant(phi, phi, 0, PLANE, 2)
    assert max(rep.tracks["A"].residuals) <= 1e-12


def test_u_invariant_tracks():
    phi = Symbol.z(1, 2) * Symbol.abs2(2, 2)
    psi = Symbol.zbar(1, 2)
    rep = expansion_check_u_invariant(phi, psi, 1, PLANE, 2)
    for name in ("A", "B", "A-B"):
        assert rep.tracks[name].meets(1.85), (name, rep.tracks[name])
    with pytest.raises(ValueError):
        expansion_check_u_invariant(phi, psi, 1, DomainSpec("disc", 0.1), 2)
    with pytest.raises(ValueError):
        expansion_check_u_invariant(Symbol.z(2, 3), psi, 1, PLANE, 3)


def test_report_serialization():
    rep = expansion_check_spectral(z**2, zb**2, 1, PLANE)
    js = rep.to_json()
    assert js["config"]["K"] == 24 and js["config"]["sign"] == -1 and js["h_grid"] == list(DEFAULT_H_GRID)
    rows = list(rep.csv_rows())
    assert rows[0] == ["track", "h", "residual"] and len(rows) == 5
    with pytest.raises(ValueError):
        expansion_check_spectral(z, zb, 0, PLANE, h_grid=(0.01, 0.1, 0.05))


def test_sup_norm_limit_examples():
    rows = sup_norm_limit(r2 * Symbol.gaussian(1), PLANE, (0.1, 0.05, 0.02))
    assert rows[-1]["K"] == 400
    assert rows[-1]["sup_norm"] == pytest.approx(math.exp(-1), abs=1e-6)
    assert abs(rows[-1]["gap"]) <= 0.02
    gaps = [r["gap"] for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    ones = sup_norm_limit(Symbol.const(1), PLANE, (0.1, 0.05, 0.02))
    assert all(r["op_norm"] == pytest.approx(1.0, abs=1e-12) for r in ones)


def test_sup_norm_limit_disc():
    rows = sup_norm_limit(r2, DomainSpec("disc", 0.3), (0.3, 0.2, 0.1))
    norms = [r["op_norm"] for r in rows]
    assert all(b > a for a, b in zip(norms, norms[1:]))
    assert 1 - norms[-1] < 1 - norms[0]
    assert all(n <= 1 + 1e-12 for n in norms)


def test_decay_table_shape():
    res = decay_table()
    assert len(res["op_norms"]) == 4
    # the compressed norm never exceeds the sup of the reduced symbol
    assert all(a <= b + 1e-12 for a, b in zip(res["op_norms"], res["sup_norm_oracle"]))
    assert all(b < a for a, b in zip(res["op_norms"], res["op_norms"][1:]))
