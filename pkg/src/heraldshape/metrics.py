"""Figures of merit for heralded signal photons and tomographic reconstruction."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import ShapingError, dagger, projector
from .linalg import purity as _purity
from .states import JointState, Shape, schmidt_decompose


@dataclass(frozen=True)
class MetricsReport:
    fidelity: float
    purity: float | None
    total_herald_rate: float
    per_outcome_rates: list[float]
    entanglement_entropy_bits: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def fidelity(rho, target) -> float:
    """Overlap ``<phi|rho|phi>`` with a pure target, clipped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    phi = target.vector() if isinstance(target, Shape) else np.asarray(target, dtype=complex)
    if rho.shape != (phi.size, phi.size):
        raise ShapingError(f"dimension mismatch: state {rho.shape} vs target {phi.size}")
    phi = phi / np.linalg.norm(phi)
    val = np.real(np.vdot(phi, rho @ phi))
    return float(min(1.0, max(0.0, val)))


def purity(rho) -> float:
    """``Tr(rho^2)``."""
    return _purity(rho)


def entanglement_entropy(state: JointState) -> float:
    """Von Neumann entropy of either reduced state of a pure joint state, in bits."""
    lam2 = np.array([c**2 for c, _, _ in schmidt_decompose(state)])
    lam2 = lam2[lam2 > 0]
    return float(max(0.0, -np.sum(lam2 * np.log2(lam2))))


def multiphoton_success(p: float, n: int) -> float:
    """``p**n`` evaluated as ``exp(n log p)``."""
    if not 0 <= p <= 1:
        raise ValueError(f"probability out of range: {p}")
    if n < 0:
        raise ValueError("photon number must be non-negative")
    if p == 0:
        return 0.0 if n > 0 else 1.0
    return math.exp(n * math.log(p))


def pair_frame(n: int) -> list[np.ndarray]:
    """Informationally complete projector frame on ``n`` modes.

    Computational projectors plus, for every mode pair ``j < k``, projectors
    onto ``(|j> + c|k>)/sqrt 2`` for ``c`` in ``{1, -1, i, -i}``. For ``n = 2``
    these are the six eigenprojectors of the three Pauli operators.
    """
    eye = np.eye(n, dtype=complex)
    frame = [projector(eye[k]) for k in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            for c in (1, -1, 1j, -1j):
                frame.append(projector((eye[j] + c * eye[k]) / np.sqrt(2)))
    return frame


def frame_probabilities(frame, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.real(np.trace(p @ rho)) for p in frame])


def tomography_reconstruct(frame, probabilities) -> np.ndarray:
    """Linear-inversion state estimate projected onto density matrices.

    Solves ``Tr(P_i rho) = p_i`` in the least-squares sense, symmetrizes,
    clips negative eigenvalues and renormalizes the trace.
    """
    frame = [np.asarray(p, dtype=complex) for p in frame]
    probabilities = np.asarray(probabilities, dtype=float)
    if len(frame) != probabilities.size:
        raise ShapingError(
            f"{len(frame)} projectors but {probabilities.size} probabilities"
        )
    if not frame:
        raise ShapingError("frame not informationally complete")
    n = frame[0].shape[0]
    # Tr(P rho) = sum_ab P_ba rho_ab = vec(P^T) . vec(rho)
    design = np.array([p.T.ravel() for p in frame])
    if np.linalg.matrix_rank(design, tol=1e-10) < n * n:
        raise ShapingError("frame not informationally complete")
    sol, *_ = np.linalg.lstsq(design, probabilities.astype(complex), rcond=None)
    rho = sol.reshape(n, n)
    rho = (rho + dagger(rho)) / 2
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    if w.sum() <= 0:
        raise ShapingError("reconstruction has no positive part")
    w = w / w.sum()
    return (v * w) @ dagger(v)


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + dagger(d)) / 2))))
