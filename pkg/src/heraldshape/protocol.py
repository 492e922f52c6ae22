"""Idler-arm pipeline: modulation, loss, projective detection and heralding."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import reduce
from math import prod
from typing import Sequence

import numpy as np

from .linalg import (
    ATOL,
    CHECK_ATOL,
    ZERO_PROB,
    ShapingError,
    dagger,
    dft_matrix,
    has_orthonormal_columns,
    partial_trace,
)
from .states import JointState, Shape

POLICIES = ("f0_only", "phase_corrected_all")


@dataclass(frozen=True, eq=False)
class Modulator:
    """Passive diagonal filter ``|k> -> amps[k] |k>`` with ``|amps[k]| <= 1``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(np.atleast_1d(self.amps), dtype=complex)
        if amps.ndim != 1:
            raise ShapingError("modulator amplitudes must be a vector")
        if np.any(np.abs(amps) > 1 + ATOL):
            raise ShapingError("modulator amplitudes exceed 1 (not a passive filter)")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    @classmethod
    def identity(cls, n: int) -> "Modulator":
        return cls(np.ones(n))

    @classmethod
    def composite(cls, *per_dof) -> "Modulator":
        """Consecutive per-degree-of-freedom filters as one diagonal on the flattened space."""
        amps = [m.amps if isinstance(m, Modulator) else np.asarray(m, dtype=complex) for m in per_dof]
        return cls(reduce(np.kron, amps))


@dataclass(frozen=True)
class LossChannel:
    """Uniform single-photon transmission ``eta`` in (0, 1]."""

    eta: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ShapingError(f"loss transmission must satisfy 0 < eta <= 1, got {self.eta}")


@dataclass(frozen=True, eq=False)
class DetectionBasis:
    """Orthonormal measurement kets stored as columns.

    ``dims`` records the per-degree-of-freedom factorization, used to undo
    the outcome-dependent phases of a Fourier measurement.
    """

    vectors: np.ndarray
    label: str = "custom"
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapingError("detection basis must be a square matrix of column kets")
        if not has_orthonormal_columns(v):
            raise ShapingError("detection basis columns are not orthonormal")
        if self.label not in ("computational", "fourier", "custom"):
            raise ShapingError(f"unknown basis label {self.label!r}")
        dims = tuple(self.dims) or (v.shape[0],)
        if prod(dims) != v.shape[0]:
            raise ShapingError("basis dims do not match its dimension")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, n: int) -> "DetectionBasis":
        return cls(np.eye(n), "computational")

    @classmethod
    def fourier(cls, n: int) -> "DetectionBasis":
        return cls(dft_matrix(n), "fourier")


@dataclass(frozen=True, eq=False)
class HeraldOutcome:
    """One detector outcome (or the aggregated no-click event).

    ``probability`` is per source pair. ``signal_state`` is the normalized
    conditional signal state; it is all zeros when ``null`` is set.
    """

    index: int
    probability: float
    signal_state: np.ndarray
    discarded: bool = False
    null: bool = False
    basis_label: str = "custom"
    dims: tuple[int, ...] = ()
    corrected: bool = False

    @property
    def multi_index(self) -> tuple[int, ...]:
        if self.index < 0:
            return ()
        return tuple(int(i) for i in np.unravel_index(self.index, self.dims))


def _divide(m: np.ndarray, p: float) -> np.ndarray:
    # numpy's complex / real goes through a reciprocal and turns x / x into 1 - eps
    return m.real / p + 1j * (m.imag / p)


def _arm_weights(state: JointState, amps: np.ndarray, arm: str) -> np.ndarray:
    if arm == "B":
        if amps.size != state.dim_b:
            raise ShapingError(f"modulator dim {amps.size} != idler dim {state.dim_b}")
        return np.kron(np.ones(state.dim_a), amps)
    if arm == "A":
        if amps.size != state.dim_a:
            raise ShapingError(f"modulator dim {amps.size} != signal dim {state.dim_a}")
        return np.kron(amps, np.ones(state.dim_b))
    raise ValueError(f"unknown subsystem label {arm!r}")


def apply_modulator(state: JointState, mod: Modulator, arm: str = "B") -> tuple[JointState, float]:
    """Filter one arm and keep the transmitted branch.

    Returns the renormalized state ``K rho K^dag / p`` and the pass
    probability ``p = Tr(K^dag K rho)``; the absorbed branch is dropped.
    """
    w = _arm_weights(state, mod.amps, arm)
    # K is diagonal, so K rho K^dag is an elementwise product
    out = state.rho * np.outer(w, np.conjugate(w))
    p = float(np.real(np.trace(out)))
    if p <= ZERO_PROB:
        raise ShapingError("modulator annihilates the state")
    return replace(state, rho=_divide(out, p)), p


def rescale_to_physical(shape: Shape) -> Modulator:
    """Scale a target shape so its largest amplitude has magnitude 1."""
    if not isinstance(shape, Shape):
        shape = Shape(shape)
    return Modulator(shape.nu / np.max(np.abs(shape.nu)))


def apply_loss(state: JointState, loss: LossChannel, arm: str = "B") -> tuple[JointState, float]:
    """Uniform loss: the surviving single-photon branch is unchanged, survival is ``eta``."""
    if arm not in ("A", "B"):
        raise ValueError(f"unknown subsystem label {arm!r}")
    return state, float(loss.eta)


def measure_idler(
    state: JointState, basis: DetectionBasis, pass_probability: float = 1.0
) -> list[HeraldOutcome]:
    """Project the idler onto each basis ket.

    The returned list holds one outcome per basis column, followed by the
    aggregated no-click event (``index=-1``, ``discarded=True``) carrying
    ``1 - pass_probability``. Outcome probabilities are scaled by
    ``pass_probability`` so the whole list sums to one.
    """
    if basis.dim != state.dim_b:
        raise ShapingError(f"basis dim {basis.dim} != idler dim {state.dim_b}")
    da, db = state.dim_a, state.dim_b
    r = state.rho.reshape(da, db, da, db)
    v = basis.vectors
    # unnormalized conditional states <b_f| rho |b_f>, stacked over f
    if basis.label == "computational":
        # plain slicing keeps blocked entries exactly zero
        cond = np.moveaxis(np.diagonal(r, axis1=1, axis2=3), -1, 0)
    else:
        cond = np.einsum("bf,abcd,df->fac", np.conjugate(v), r, v, optimize=True)
    # exact Hermitian part, so the diagonal is real before normalizing
    cond = (cond + np.conjugate(np.swapaxes(cond, 1, 2))) / 2
    probs = np.real(np.einsum("faa->f", cond))
    dims = basis.dims if basis.label == "fourier" else (db,)
    outcomes = []
    for f in range(db):
        pf = float(probs[f])
        if pf <= ZERO_PROB:
            outcomes.append(
                HeraldOutcome(f, 0.0, np.zeros((da, da), complex), null=True,
                              basis_label=basis.label, dims=dims)
            )
            continue
        rho_a = _divide(cond[f], pf)
        outcomes.append(
            HeraldOutcome(f, pf * pass_probability, rho_a, basis_label=basis.label, dims=dims)
        )
    outcomes.append(
        HeraldOutcome(-1, max(0.0, 1.0 - pass_probability), np.zeros((da, da), complex),
                      discarded=True, null=True, basis_label=basis.label, dims=dims)
    )
    return outcomes


def fourier_phases(dims: Sequence[int], f: int) -> np.ndarray:
    """Diagonal of ``U_f = sum_k exp(+2i pi k.f / n) |k><k|`` over a tensor of Fourier factors."""
    dims = tuple(dims)
    f_multi = np.unravel_index(f, dims)
    phase = np.zeros(dims)
    for axis, (n, fi) in enumerate(zip(dims, f_multi)):
        shape = [1] * len(dims)
        shape[axis] = n
        phase = phase + (np.arange(n) * fi / n).reshape(shape)
    return np.exp(2j * np.pi * phase).ravel()


def phase_correct(outcome: HeraldOutcome, n: int | Sequence[int] | None = None) -> HeraldOutcome:
    """Undo the outcome-dependent phase ramp left by a Fourier-basis click.

    After correction every Fourier outcome carries the same signal shape as
    outcome zero. The probability is unchanged.
    """
    if outcome.basis_label != "fourier" or outcome.discarded:
        raise ShapingError("phase correction defined only for Fourier outcomes")
    dims = outcome.dims
    if n is not None:
        if isinstance(n, (int, np.integer)):
            if int(n) != prod(dims):
                raise ShapingError(f"outcome dimension {prod(dims)} != {n}")
        elif tuple(n) != dims:
            raise ShapingError(f"outcome dims {dims} != {tuple(n)}")
    if outcome.null or outcome.index == 0:
        return replace(outcome, corrected=True)
    u = fourier_phases(dims, outcome.index)
    rho = outcome.signal_state * np.outer(u, np.conjugate(u))
    return replace(outcome, signal_state=rho, corrected=True)


def bucket_detect(state: JointState) -> np.ndarray:
    """Signal state when the idler is collected without mode discrimination."""
    return partial_trace(state.rho, state.dim_a, state.dim_b, keep="A")


def eraser_basis(dims: Sequence[int]) -> DetectionBasis:
    """Tensor product of per-degree-of-freedom Fourier bases (row-major)."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ShapingError(f"invalid eraser dims {dims}")
    if len(dims) > 1 and any(d < 2 for d in dims):
        raise ShapingError("each degree of freedom needs at least two modes")
    return DetectionBasis(reduce(np.kron, [dft_matrix(d) for d in dims]), "fourier", dims)


def is_unbiased(b1: DetectionBasis, b2: DetectionBasis, atol: float = CHECK_ATOL) -> bool:
    """True when every overlap ``|<u_i|v_j>|^2`` equals ``1/n``."""
    if b1.dim != b2.dim:
        raise ShapingError(f"dimension mismatch: {b1.dim} vs {b2.dim}")
    overlaps = np.abs(dagger(b1.vectors) @ b2.vectors) ** 2
    return bool(np.max(np.abs(overlaps - 1 / b1.dim)) <= atol)


@dataclass(frozen=True, eq=False)
class HeraldResult:
    """Full outcome table of one pipeline evaluation."""

    outcomes: list[HeraldOutcome]
    policy: str
    pass_probability: float
    accepted: list[HeraldOutcome] = field(default_factory=list)

    @property
    def detector_outcomes(self) -> list[HeraldOutcome]:
        return [o for o in self.outcomes if not o.discarded]

    @property
    def discard_probability(self) -> float:
        return sum(o.probability for o in self.outcomes if o.discarded)

    @property
    def click_rate(self) -> float:
        return sum(o.probability for o in self.detector_outcomes)

    @property
    def herald_rate(self) -> float:
        return sum(o.probability for o in self.accepted)

    def heralded_state(self) -> np.ndarray:
        """Probability-weighted signal state over accepted clicks."""
        live = [o for o in self.accepted if not o.null]
        total = sum(o.probability for o in live)
        if total <= ZERO_PROB:
            raise ShapingError("no accepted outcome has nonzero probability")
        return sum(o.probability * o.signal_state for o in live) / total


def herald(
    source: JointState,
    modulator: Modulator | None = None,
    loss: LossChannel | None = None,
    basis: DetectionBasis | None = None,
    policy: str = "f0_only",
) -> HeraldResult:
    """Run source -> modulator -> loss -> detector and apply a heralding policy.

    ``f0_only`` accepts the zero Fourier outcome alone; ``phase_corrected_all``
    accepts every click and phase-corrects it. Non-Fourier bases accept every
    click uncorrected under either policy.
    """
    if policy not in POLICIES:
        raise ShapingError(f"unknown heralding policy {policy!r}")
    basis = basis if basis is not None else DetectionBasis.fourier(source.dim_b)
    if basis.label == "custom" and not is_unbiased(basis, DetectionBasis.computational(basis.dim)):
        raise ShapingError("custom detection basis is not unbiased to the modulation basis")
    state, p_pass = source, 1.0
    if modulator is not None:
        state, p_mod = apply_modulator(state, modulator, "B")
        p_pass *= p_mod
    if loss is not None:
        state, p_loss = apply_loss(state, loss, "B")
        p_pass *= p_loss
    outcomes = measure_idler(state, basis, p_pass)
    clicks = [o for o in outcomes if not o.discarded]
    if basis.label != "fourier":
        accepted = clicks
    elif policy == "f0_only":
        accepted = clicks[:1]
    else:
        accepted = [phase_correct(o) for o in clicks]
        lookup = {o.index: o for o in accepted}
        outcomes = [lookup.get(o.index, o) if not o.discarded else o for o in outcomes]
    return HeraldResult(outcomes, policy, p_pass, accepted)
