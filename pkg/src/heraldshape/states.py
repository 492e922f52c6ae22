"""Source states for heralded shaping and their Schmidt analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .linalg import CHECK_ATOL, ShapingError, is_density, partial_trace, projector, purity


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Shape:
    """Complex amplitudes ``nu_k`` of a single photon over ``N`` discrete modes."""

    nu: np.ndarray

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=complex))
        if nu.ndim != 1 or nu.size == 0:
            raise ShapingError("shape must be a non-empty 1-d amplitude vector")
        if not np.any(np.abs(nu) > 0):
            raise ShapingError("null shape")
        object.__setattr__(self, "nu", _frozen(nu))

    @classmethod
    def from_pairs(cls, pairs) -> "Shape":
        """Build from ``[[re, im], ...]``."""
        return cls(np.array([complex(re, im) for re, im in pairs]))

    @property
    def dim(self) -> int:
        return self.nu.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.nu))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm**2 - 1) <= 1e-12

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(np.abs(self.nu) > 0))

    def normalized(self) -> "Shape":
        return Shape(self.nu / self.norm)

    def vector(self) -> np.ndarray:
        """The normalized ket ``|phi>``."""
        return self.nu / self.norm


@dataclass(frozen=True)
class ModeSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapingError(f"invalid mode dimensions {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def flat_index(self, *idx: int) -> int:
        return int(np.ravel_multi_index(idx, self.dims))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.dims))


@dataclass(frozen=True, eq=False)
class JointState:
    """Bipartite density matrix, signal ``A`` first, idler ``B`` second."""

    rho: np.ndarray
    dim_a: int
    dim_b: int
    modes: ModeSpace | None = field(default=None)

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        d = self.dim_a * self.dim_b
        if rho.shape != (d, d):
            raise ShapingError(f"shape mismatch: {rho.shape} for {self.dim_a}x{self.dim_b}")
        object.__setattr__(self, "rho", _frozen(rho))
        if self.modes is None:
            object.__setattr__(self, "modes", ModeSpace((self.dim_a,)))

    @classmethod
    def from_vector(cls, psi, dim_a: int, dim_b: int, modes: ModeSpace | None = None) -> "JointState":
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(projector(psi / np.linalg.norm(psi)), dim_a, dim_b, modes)

    @property
    def purity(self) -> float:
        return purity(self.rho)

    @property
    def pure(self) -> bool:
        return abs(self.purity - 1) <= CHECK_ATOL

    def reduced(self, keep: str = "A") -> np.ndarray:
        return partial_trace(self.rho, self.dim_a, self.dim_b, keep)

    def state_vector(self) -> np.ndarray:
        """Ket of a pure state, phase fixed so its largest entry is real positive."""
        if not self.pure:
            raise ShapingError("state is not pure")
        w, v = np.linalg.eigh(self.rho)
        psi = v[:, -1]
        j = np.argmax(np.abs(psi))
        return psi * (np.abs(psi[j]) / psi[j])

    def validate(self) -> "JointState":
        if not is_density(self.rho):
            raise ShapingError("joint state is not a valid density matrix")
        return self


def _maximally_entangled_vector(n: int) -> np.ndarray:
    psi = np.zeros(n * n, dtype=complex)
    psi[np.arange(n) * (n + 1)] = 1 / np.sqrt(n)
    return psi


def correlated_pair(n: int, p: float) -> JointState:
    """Mixture ``p |Phi><Phi| + (1 - p)/n sum_k |kk><kk|``.

    ``p = 1`` is the maximally entangled resource, ``p = 0`` the classically
    correlated separable state.
    """
    if n < 2:
        raise ShapingError("correlated_pair needs n >= 2")
    if not 0 <= p <= 1:
        raise ShapingError("invalid mixing parameter")
    diag_idx = np.arange(n) * (n + 1)
    rho = np.zeros((n * n, n * n), dtype=complex)
    # coherences between |kk> and |jj> only survive with weight p
    rho[np.ix_(diag_idx, diag_idx)] = p / n
    rho[diag_idx, diag_idx] = 1 / n
    return JointState(rho, n, n)


def generalized_bell(n: int, m: int, shift_phase: int) -> JointState:
    """``(1/sqrt n) sum_k exp(2i pi k s / n) |k>_A |k+m mod n>_B``."""
    if n < 2:
        raise ShapingError("generalized_bell needs n >= 2")
    m %= n
    shift_phase %= n
    k = np.arange(n)
    psi = np.zeros(n * n, dtype=complex)
    psi[k * n + (k + m) % n] = np.exp(2j * np.pi * k * shift_phase / n) / np.sqrt(n)
    return JointState(projector(psi), n, n)


def shaped_entangled(shape: Shape) -> JointState:
    """Pure state ``sum_k nu_k |kk>`` with the target shape built into the source."""
    if not isinstance(shape, Shape):
        shape = Shape(shape)
    n = shape.dim
    psi = np.zeros(n * n, dtype=complex)
    psi[np.arange(n) * (n + 1)] = shape.vector()
    return JointState(projector(psi), n, n)


def hyperentangled(n1: int, n2: int) -> JointState:
    """Maximal entanglement in two degrees of freedom, ``sum_{k,l} |k,l>_A |k,l>_B``.

    Each arm is the row-major flattening of ``(k, l)``, so the result equals
    ``correlated_pair(n1 * n2, 1)`` carrying a two-factor mode space.
    """
    if n1 < 2 or n2 < 2:
        raise ShapingError("hyperentangled needs n1, n2 >= 2")
    n = n1 * n2
    return JointState(projector(_maximally_entangled_vector(n)), n, n, ModeSpace((n1, n2)))


def product_state(a, b) -> JointState:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return JointState.from_vector(np.kron(a, b), a.size, b.size)


def schmidt_decompose(state: JointState) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Schmidt coefficients (descending) with their orthonormal vector pairs.

    Terms with coefficients below ``1e-14`` are dropped.
    """
    if not state.pure:
        raise ShapingError("Schmidt decomposition requires a pure state")
    c = state.state_vector().reshape(state.dim_a, state.dim_b)
    u, s, vh = np.linalg.svd(c)
    return [(float(s[i]), u[:, i], vh[i, :]) for i in range(s.size) if s[i] > 1e-14]
