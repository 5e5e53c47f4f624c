import numpy as np
import pytest

from matrixbt.domain import mu_sample, spectral_apply
from matrixbt.fock import DomainSpec, FockBasis, op_norm, toeplitz_matrix
from matrixbt.hilbert import (
    MatrixBasisIndex,
    compare_spectral,
    compare_u_invariant,
    det_gaussian_symbol,
    gram_mc,
    iota,
    iota_inverse,
    matrix_toeplitz_mc,
    spectral_symbol,
    verify_gram,
)
from matrixbt.symbols import Symbol

PLANE = DomainSpec("plane", 0.5)
DISC = DomainSpec("disc", 0.3)


def test_index_flattening():
    assert MatrixBasisIndex(2, 1).flat(2) == 4
    assert MatrixBasisIndex.from_flat(4, 2) == (2, 1)
    with pytest.raises(ValueError):
        MatrixBasisIndex(0, 3).flat(2)


def test_iota():
    v = np.zeros(8)
    v[MatrixBasisIndex(2, 1).flat(2)] = 1
    c = iota(v, 2)
    assert c.shape == (4, 2) and c[2, 0] == 1
    rng = np.random.default_rng(0)
    w = rng.normal(size=10) + 1j * rng.normal(size=10)
    np.testing.assert_array_equal(iota_inverse(iota(w, 2)), w)
    assert np.linalg.norm(iota(w, 5)) == pytest.approx(np.linalg.norm(w))
    with pytest.raises(ValueError):
        iota(np.zeros(7), 2)


def test_gram_plane():
    est = gram_mc(PLANE, 2, 3, 100_000, seed=1)
    assert np.max(est.z_scores(np.eye(8))) <= 5


def test_gram_scalar_case():
    est = gram_mc(PLANE, 1, 3, 20_000, seed=2)
    assert np.max(est.z_scores(np.eye(4))) <= 5


def test_gram_disc():
    rep = verify_gram(DISC, 2, 2, 100_000, seed=3)
    assert rep.passed and rep.domain == "disc"
    assert rep.to_json()["pass"] is True


def test_identity_symbol_is_gram():
    ident = lambda Z: np.broadcast_to(np.eye(2), Z.U.shape)  # noqa: E731
    a = matrix_toeplitz_mc(ident, PLANE, 2, 2, 10_000, seed=4)
    b = gram_mc(PLANE, 2, 2, 10_000, seed=4)
    np.testing.assert_allclose(a.mean, b.mean, atol=1e-13)


def test_spectral_z_shift():
    est = matrix_toeplitz_mc(spectral_symbol(Symbol.z()), PLANE, 2, 3, 100_000, seed=5)
    shift = np.diag(np.sqrt((np.arange(3) + 1) * PLANE.h), -1)
    assert np.max(est.z_scores(np.kron(shift, np.eye(2)))) <= 5


def test_det_gaussian_reduction():
    h = PLANE.h
    est = matrix_toeplitz_mc(det_gaussian_symbol, PLANE, 2, 3, 100_000, seed=6)
    reduced = h / (1 + h) ** 2 * Symbol.abs2() * Symbol.gaussian(1)
    target = np.kron(toeplitz_matrix(reduced, FockBasis(PLANE, 3)).entries, np.eye(2))
    assert np.max(est.z_scores(target)) <= 5


def test_compare_spectral_examples():
    assert compare_spectral(Symbol.const(1), PLANE, 2, 4, 20_000, seed=7).passed
    assert compare_spectral(Symbol.z() * Symbol.zbar(), PLANE, 2, 4, 100_000, seed=8).passed
    assert compare_spectral(Symbol.z() ** 2, PLANE, 3, 3, 100_000, seed=9).passed


def test_compare_u_invariant_examples():
    rep = compare_u_invariant(Symbol.z(1, 2) * Symbol.abs2(2, 2), PLANE, 2, 3, 100_000, seed=10)
    assert rep.passed and rep.theorem_part == "v"
    # depends only on d_1: same target as the spectral comparison
    a = compare_u_invariant(Symbol.z(1, 2) ** 2, PLANE, 2, 3, 20_000, seed=11)
    b = compare_spectral(Symbol.z() ** 2, PLANE, 2, 3, 20_000, seed=11)
    assert a.max_z == pytest.approx(b.max_z, rel=1e-9)
    with pytest.raises(ValueError):
        compare_u_invariant(Symbol.z(2, 3), PLANE, 3, 2, 1000)


def test_hermitian_covariance_same_stream():
    phi = Symbol.z() ** 2 + 2j * Symbol.abs2()
    a = matrix_toeplitz_mc(spectral_symbol(phi), PLANE, 2, 3, 20_000, seed=12)
    b = matrix_toeplitz_mc(spectral_symbol(phi.conj()), PLANE, 2, 3, 20_000, seed=12)
    np.testing.assert_allclose(b.mean, a.mean.conj().T, atol=1e-12)


def test_norm_bound_mc():
    phi = Symbol.abs2() * Symbol.gaussian(1)
    est = matrix_toeplitz_mc(spectral_symbol(phi), PLANE, 2, 4, 50_000, seed=13)
    Z = mu_sample(PLANE, 2, 1, np.random.default_rng(14), size=20_000)
    sup = np.max(np.linalg.norm(spectral_apply(phi, Z), ord=2, axis=(-2, -1)))
    assert op_norm(est.mean) <= sup + 5 * est.stderr.max()


def test_report_json_keys():
    rep = verify_gram(PLANE, 1, 1, 1000, seed=0)
    keys = set(rep.to_json())
    assert {"theorem_part", "N", "K", "h", "samples", "max_z", "frobenius", "pass"} <= keys
