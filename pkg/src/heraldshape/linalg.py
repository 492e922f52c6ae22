"""Dense complex linear algebra over small mode spaces.

Composite indices are flattened row-major: ``(i_a, i_b) -> i_a * dim_b + i_b``.
"""

from __future__ import annotations

import numpy as np

# equality of amplitudes / matrix entries
ATOL = 1e-12
# unitarity, trace and positivity checks
CHECK_ATOL = 1e-10
# probabilities at or below this are treated as exactly zero
ZERO_PROB = 1e-15


class ShapingError(ValueError):
    """Raised when a physical object cannot be constructed or transformed."""


def kron(a, b) -> np.ndarray:
    """Kronecker product with index convention ``(i_a, i_b) -> i_a * rows_b + i_b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho, dim_a: int, dim_b: int, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of a bipartite operator.

    Parameters
    ----------
    rho : array_like
        Operator on the ``dim_a * dim_b`` dimensional joint space.
    dim_a, dim_b : int
        Subsystem dimensions.
    keep : {"A", "B"}
        Which subsystem survives the trace.
    """
    rho = np.asarray(rho, dtype=complex)
    d = dim_a * dim_b
    if rho.shape != (d, d):
        raise ShapingError(
            f"shape mismatch: operator {rho.shape} vs subsystems {dim_a}x{dim_b}"
        )
    r = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"unknown subsystem label {keep!r}")


def dft_matrix(n: int) -> np.ndarray:
    """Unitary ``F[k, f] = exp(+2j*pi*k*f/n) / sqrt(n)``; column ``f`` is the ket ``|f>``."""
    if n < 1:
        raise ShapingError("empty space")
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def dagger(m) -> np.ndarray:
    return np.conjugate(np.asarray(m)).T


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, np.conjugate(v))


def is_unitary(u, atol: float = CHECK_ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= atol)


def has_orthonormal_columns(v, atol: float = CHECK_ATOL) -> bool:
    v = np.asarray(v)
    if v.ndim != 2:
        return False
    return bool(np.max(np.abs(dagger(v) @ v - np.eye(v.shape[1]))) <= atol)


def is_hermitian(m, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(
        np.max(np.abs(m - dagger(m))) <= atol
    )


def is_density(rho, atol: float = CHECK_ATOL) -> bool:
    """Hermitian, unit trace and positive semidefinite within tolerance."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)


def purity(rho) -> float:
    """``Tr(rho^2)`` for a Hermitian operator, computed as the squared Frobenius norm."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho) ** 2))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho)
