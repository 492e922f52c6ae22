import numpy as np
import pytest
from numpy.testing import assert_allclose

from heraldshape.linalg import (
    ShapingError,
    dft_matrix,
    is_density,
    is_unitary,
    kron,
    partial_trace,
    projector,
    random_density,
)


def naive_trace_b(rho, da, db):
    out = np.zeros((da, da), complex)
    for i in range(da):
        for j in range(da):
            for b in range(db):
                out[i, j] += rho[i * db + b, j * db + b]
    return out


def naive_trace_a(rho, da, db):
    out = np.zeros((db, db), complex)
    for i in range(db):
        for j in range(db):
            for a in range(da):
                out[i, j] += rho[a * db + i, a * db + j]
    return out


def test_kron_identity():
    assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_block_swap():
    x = np.array([[0, 1], [1, 0]])
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[1, 3] = expected[2, 0] = expected[3, 1] = 1
    assert_allclose(kron(x, np.eye(2)), expected)


def test_kron_index_convention(rng):
    a = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    b = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    k = kron(a, b)
    assert k.shape == (6, 6)
    for ia in range(2):
        for ja in range(3):
            for ib in range(3):
                for jb in range(2):
                    assert abs(k[ia * 3 + ib, ja * 2 + jb] - a[ia, ja] * b[ib, jb]) <= 1e-15


def test_kron_of_dfts_has_flat_magnitudes():
    f = dft_matrix(2)
    elementwise = np.array([[f[i // 2, j // 2] * f[i % 2, j % 2] for j in range(4)] for i in range(4)])
    assert_allclose(kron(f, f), elementwise, atol=1e-15)
    assert_allclose(np.abs(kron(f, f)), 0.5, atol=1e-12)


def test_kron_associative(rng):
    a, b, c = (rng.standard_normal((2, 2)) + 1j for _ in range(3))
    assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=0)


def test_partial_trace_maximally_entangled():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert_allclose(partial_trace(projector(psi), 2, 2, "A"), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product(rng):
    ra, rb = random_density(3, rng), random_density(2, rng)
    assert_allclose(partial_trace(np.kron(ra, rb), 3, 2, "A"), ra, atol=1e-14)
    assert_allclose(partial_trace(np.kron(ra, rb), 3, 2, "B"), rb, atol=1e-14)


def test_partial_trace_modulated_n3():
    nu = np.array([1, 0.8, 0.5])
    nu = nu / np.linalg.norm(nu)
    psi = np.zeros(9, complex)
    for k in range(3):
        psi[k * 3 + k] = nu[k]
    rho = projector(psi)
    expected = naive_trace_b(rho, 3, 3)
    assert_allclose(partial_trace(rho, 3, 3), expected, atol=1e-12)
    assert_allclose(expected, np.diag(nu**2) / np.sum(nu**2), atol=1e-12)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 5), (3, 4), (5, 5), (4, 3)])
def test_partial_trace_matches_loops(rng, da, db):
    rho = random_density(da * db, rng)
    assert_allclose(partial_trace(rho, da, db, "A"), naive_trace_b(rho, da, db), atol=1e-12)
    assert_allclose(partial_trace(rho, da, db, "B"), naive_trace_a(rho, da, db), atol=1e-12)
    assert abs(np.trace(partial_trace(rho, da, db)) - np.trace(rho)) <= 1e-12


def test_partial_trace_shape_mismatch():
    with pytest.raises(ShapingError, match="shape mismatch"):
        partial_trace(np.eye(6) / 6, 2, 2)


def test_dft_small_cases():
    assert_allclose(dft_matrix(1), [[1]])
    assert_allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)
    # column f=1 of the 4-point basis, entries exp(i pi k / 2) / 2
    col = np.array([np.exp(1j * np.pi * k / 2) / 2 for k in range(4)])
    assert_allclose(dft_matrix(4)[:, 1], col, atol=1e-15)
    assert_allclose(col, np.array([1, 1j, -1, -1j]) / 2, atol=1e-15)


def test_dft_empty_space():
    with pytest.raises(ShapingError, match="empty space"):
        dft_matrix(0)


@pytest.mark.parametrize("n", range(1, 65))
def test_dft_unitary_and_unbiased(n):
    f = dft_matrix(n)
    assert is_unitary(f, atol=1e-10)
    assert np.max(np.abs(np.abs(f) - 1 / np.sqrt(n))) <= 1e-12


def test_is_density(rng):
    assert is_density(random_density(4, rng))
    assert not is_density(np.diag([1.2, -0.2]))
    assert not is_density(np.array([[0.5, 0.1], [0.2, 0.5]]))
    assert not is_density(np.eye(2))
