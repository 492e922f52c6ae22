"""Declarative scenario files and the exact pipeline run they describe.

A scenario is a JSON object::

    {
      "dims": [4],
      "target_shape": [[1, 0], [0.8, 0], [0.5, 0], [0.2, 0]],
      "source": {"kind": "max_entangled", "p": 1.0, "m": 0, "phase_index": 0},
      "modulator_enabled": true,
      "loss_eta": 1.0,
      "detector": {"basis": "fourier", "custom_unitary": null,
                   "accept_policy": "f0_only"},
      "montecarlo": {"trials": 100000, "seed": 7}
    }

Complex numbers are ``[re, im]`` pairs. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from math import prod
from pathlib import Path
from typing import Any

import numpy as np

from .linalg import ShapingError, has_orthonormal_columns
from .metrics import MetricsReport, entanglement_entropy, fidelity, purity
from .protocol import (
    POLICIES,
    DetectionBasis,
    HeraldResult,
    LossChannel,
    eraser_basis,
    herald,
    rescale_to_physical,
)
from .states import (
    JointState,
    ModeSpace,
    Shape,
    correlated_pair,
    generalized_bell,
    hyperentangled,
    shaped_entangled,
)

SOURCE_KINDS = ("max_entangled", "werner", "shaped", "generalized_bell", "hyperentangled")
BASES = ("fourier", "computational", "custom")
SEED_ENV = "HERALDSHAPE_SEED"
FALLBACK_SEED = 20150101
DEFAULT_TOLERANCE = 1e-12

# cosmetic aliases for the two-slit / polarization example
TWO_DOF_LABELS = (("left", "right"), ("H", "V"))


class ScenarioError(ValueError):
    """Malformed or out-of-range scenario; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return FALLBACK_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ScenarioError(f"not an integer: {raw!r}", SEED_ENV) from exc


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "max_entangled"
    p: float = 1.0
    m: int = 0
    phase_index: int = 0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ScenarioError(f"unknown kind {self.kind!r}, expected one of {SOURCE_KINDS}", "source.kind")
        if not 0 <= self.p <= 1:
            raise ScenarioError(f"must lie in [0, 1], got {self.p}", "source.p")


@dataclass(frozen=True)
class DetectorSpec:
    basis: str = "fourier"
    custom_unitary: tuple[tuple[complex, ...], ...] | None = None
    accept_policy: str = "f0_only"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ScenarioError(f"unknown basis {self.basis!r}", "detector.basis")
        if self.accept_policy not in POLICIES:
            raise ScenarioError(f"unknown policy {self.accept_policy!r}", "detector.accept_policy")
        if (self.basis == "custom") != (self.custom_unitary is not None):
            raise ScenarioError("required exactly when basis is 'custom'", "detector.custom_unitary")
        if self.custom_unitary is not None and not has_orthonormal_columns(np.array(self.custom_unitary)):
            raise ScenarioError("columns are not orthonormal", "detector.custom_unitary")


@dataclass(frozen=True)
class MonteCarloSpec:
    trials: int
    seed: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ScenarioError(f"must be >= 1, got {self.trials}", "montecarlo.trials")


@dataclass(frozen=True)
class Scenario:
    dims: tuple[int, ...]
    target_shape: tuple[complex, ...]
    source: SourceSpec = field(default_factory=SourceSpec)
    modulator_enabled: bool = True
    loss_eta: float = 1.0
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    montecarlo: MonteCarloSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "target_shape", tuple(complex(z) for z in self.target_shape))
        if not self.dims or any(d < 2 for d in self.dims):
            raise ScenarioError(f"every mode count must be >= 2, got {list(self.dims)}", "dims")
        if prod(self.dims) != len(self.target_shape):
            raise ScenarioError(
                f"has {len(self.target_shape)} amplitudes but dims multiply to {prod(self.dims)}",
                "target_shape",
            )
        if not 0 < self.loss_eta <= 1:
            raise ScenarioError(f"must satisfy 0 < eta <= 1, got {self.loss_eta}", "loss_eta")
        if self.source.kind == "hyperentangled" and len(self.dims) != 2:
            raise ScenarioError("hyperentangled source needs exactly two dims", "source.kind")
        if self.source.kind == "shaped" and self.modulator_enabled:
            raise ScenarioError("shaped source already carries the target; disable the modulator",
                                "modulator_enabled")
        if self.detector.custom_unitary is not None:
            n = len(self.detector.custom_unitary)
            if n != self.total_dim:
                raise ScenarioError(f"is {n}x{n}, idler has {self.total_dim} modes", "detector.custom_unitary")

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def to_dict(self) -> dict[str, Any]:
        unitary = self.detector.custom_unitary
        return {
            "dims": list(self.dims),
            "target_shape": [[z.real, z.imag] for z in self.target_shape],
            "source": asdict(self.source),
            "modulator_enabled": self.modulator_enabled,
            "loss_eta": self.loss_eta,
            "detector": {
                "basis": self.detector.basis,
                "custom_unitary": None if unitary is None
                else [[[z.real, z.imag] for z in row] for row in unitary],
                "accept_policy": self.detector.accept_policy,
            },
            "montecarlo": None if self.montecarlo is None else asdict(self.montecarlo),
        }

    def with_param(self, name: str, value: float) -> "Scenario":
        """Copy with one sweepable parameter replaced (``eta`` or ``p``)."""
        if name == "eta":
            return replace(self, loss_eta=float(value))
        if name == "p":
            if self.source.kind != "werner":
                raise ScenarioError("sweeping p requires source kind 'werner'", "source.kind")
            return replace(self, source=replace(self.source, p=float(value)))
        raise ScenarioError(f"unknown sweep parameter {name!r}", "param")


# -- strict parsing ---------------------------------------------------------

def _check_keys(obj: Any, where: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", where or "<root>")
    for key in obj:
        if key not in allowed:
            raise ScenarioError("unknown field", f"{where}.{key}" if where else key)
    for key in required:
        if key not in obj:
            raise ScenarioError("missing required field", f"{where}.{key}" if where else key)
    return obj


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"expected a number, got {v!r}", where)
    return float(v)


def _integer(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"expected an integer, got {v!r}", where)
    return v


def _boolean(v: Any, where: str) -> bool:
    if not isinstance(v, bool):
        raise ScenarioError(f"expected true/false, got {v!r}", where)
    return v


def _complex(v: Any, where: str) -> complex:
    if not isinstance(v, list) or len(v) != 2:
        raise ScenarioError(f"expected a [re, im] pair, got {v!r}", where)
    return complex(_number(v[0], where), _number(v[1], where))


def _list(v: Any, where: str) -> list:
    if not isinstance(v, list):
        raise ScenarioError(f"expected an array, got {v!r}", where)
    return v


def parse_scenario(data: Any) -> Scenario:
    """Validate a decoded JSON object into a :class:`Scenario`."""
    top = {"dims", "target_shape", "source", "modulator_enabled", "loss_eta", "detector", "montecarlo"}
    _check_keys(data, "", top, {"dims", "target_shape"})
    dims = tuple(_integer(d, f"dims[{i}]") for i, d in enumerate(_list(data["dims"], "dims")))
    target = tuple(
        _complex(z, f"target_shape[{i}]") for i, z in enumerate(_list(data["target_shape"], "target_shape"))
    )

    src = _check_keys(data.get("source", {}), "source", {"kind", "p", "m", "phase_index"})
    kind = src.get("kind", "max_entangled")
    if not isinstance(kind, str):
        raise ScenarioError(f"expected a string, got {kind!r}", "source.kind")
    source = SourceSpec(
        kind=kind,
        p=_number(src.get("p", 1.0), "source.p"),
        m=_integer(src.get("m", 0), "source.m"),
        phase_index=_integer(src.get("phase_index", 0), "source.phase_index"),
    )

    det = _check_keys(data.get("detector", {}), "detector", {"basis", "custom_unitary", "accept_policy"})
    unitary = det.get("custom_unitary")
    if unitary is not None:
        unitary = tuple(
            tuple(_complex(z, f"detector.custom_unitary[{i}][{j}]") for j, z in enumerate(_list(row, "detector.custom_unitary")))
            for i, row in enumerate(_list(unitary, "detector.custom_unitary"))
        )
        if any(len(row) != len(unitary) for row in unitary):
            raise ScenarioError("must be a square matrix", "detector.custom_unitary")
    for key in ("basis", "accept_policy"):
        if key in det and not isinstance(det[key], str):
            raise ScenarioError(f"expected a string, got {det[key]!r}", f"detector.{key}")
    detector = DetectorSpec(
        basis=det.get("basis", "fourier"),
        custom_unitary=unitary,
        accept_policy=det.get("accept_policy", "f0_only"),
    )

    mc = data.get("montecarlo")
    montecarlo = None
    if mc is not None:
        _check_keys(mc, "montecarlo", {"trials", "seed"}, {"trials"})
        seed = mc.get("seed")
        montecarlo = MonteCarloSpec(
            trials=_integer(mc["trials"], "montecarlo.trials"),
            seed=None if seed is None else _integer(seed, "montecarlo.seed"),
        )

    return Scenario(
        dims=dims,
        target_shape=target,
        source=source,
        modulator_enabled=_boolean(data.get("modulator_enabled", True), "modulator_enabled"),
        loss_eta=_number(data.get("loss_eta", 1.0), "loss_eta"),
        detector=detector,
        montecarlo=montecarlo,
    )


def load_scenario(path: str | os.PathLike) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc.strerror}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                            str(path)) from exc
    return parse_scenario(data)


# -- exact evaluation -------------------------------------------------------

def build_source(scenario: Scenario, shape: Shape) -> JointState:
    n = scenario.total_dim
    src = scenario.source
    if src.kind == "max_entangled":
        state = correlated_pair(n, 1.0)
    elif src.kind == "werner":
        state = correlated_pair(n, src.p)
    elif src.kind == "generalized_bell":
        state = generalized_bell(n, src.m, src.phase_index)
    elif src.kind == "shaped":
        state = shaped_entangled(shape)
    else:
        return hyperentangled(*scenario.dims)
    if len(scenario.dims) > 1:
        state = replace(state, modes=ModeSpace(scenario.dims))
    return state


def build_basis(scenario: Scenario) -> DetectionBasis:
    det = scenario.detector
    if det.basis == "fourier":
        return eraser_basis(scenario.dims)
    if det.basis == "computational":
        return DetectionBasis.computational(scenario.total_dim)
    return DetectionBasis(np.array(det.custom_unitary), "custom")


def run_exact(scenario: Scenario) -> tuple[Shape, JointState, HeraldResult]:
    """Exact pipeline for a scenario; raises :class:`ShapingError` on physics failures."""
    shape = Shape(np.array(scenario.target_shape))
    source = build_source(scenario, shape)
    modulator = rescale_to_physical(shape) if scenario.modulator_enabled else None
    loss = LossChannel(scenario.loss_eta) if scenario.loss_eta < 1 else None
    result = herald(source, modulator, loss, build_basis(scenario), scenario.detector.accept_policy)
    return shape, source, result


def mode_labels(dims: tuple[int, ...]) -> list[str] | None:
    if dims != (2, 2):
        return None
    return [f"{a},{b}" for a in TWO_DOF_LABELS[0] for b in TWO_DOF_LABELS[1]]


@dataclass
class RunReport:
    scenario: dict[str, Any]
    per_outcome: list[dict[str, Any]]
    discard_probability: float
    totals: MetricsReport
    tolerance: float
    timing_ms: float
    mode_labels: list[str] | None = None
    montecarlo: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["totals"] = self.totals.to_dict()
        return out


def run_scenario(
    scenario: Scenario,
    tolerance: float = DEFAULT_TOLERANCE,
    trials: int | None = None,
    seed: int | None = None,
) -> RunReport:
    """Exact pipeline plus optional Monte Carlo, packaged as a report.

    ``trials``/``seed`` override the scenario's Monte Carlo block; giving
    ``trials`` enables sampling even when the scenario has none.
    """
    from .montecarlo import simulate_clicks

    start = time.perf_counter()
    shape, source, result = run_exact(scenario)
    accepted = {o.index for o in result.accepted}
    rows = []
    for o in result.detector_outcomes:
        row: dict[str, Any] = {
            "f": o.index,
            "probability": o.probability,
            "accepted": o.index in accepted,
            "fidelity": None if o.null else fidelity(o.signal_state, shape),
            "purity": None if o.null else purity(o.signal_state),
        }
        if len(scenario.dims) > 1 and scenario.detector.basis == "fourier":
            row["f_multi"] = list(o.multi_index)
        row["target_reached"] = row["fidelity"] is not None and row["fidelity"] >= 1 - tolerance
        rows.append(row)

    try:
        rho = result.heralded_state()
        fid, pur = fidelity(rho, shape), purity(rho)
    except ShapingError:
        fid, pur = 0.0, None
    totals = MetricsReport(
        fidelity=fid,
        purity=pur,
        total_herald_rate=result.herald_rate,
        per_outcome_rates=[r["probability"] if r["accepted"] else 0.0 for r in rows],
        entanglement_entropy_bits=entanglement_entropy(source) if source.pure else None,
    )

    mc_stats = None
    mc = scenario.montecarlo
    if trials is not None or seed is not None or mc is not None:
        n_trials = trials if trials is not None else (mc.trials if mc is not None else None)
        if n_trials is not None:
            use_seed = seed if seed is not None else (mc.seed if mc is not None and mc.seed is not None
                                                      else default_seed())
            mc_stats = simulate_clicks(scenario, n_trials, use_seed).to_dict()

    return RunReport(
        scenario=scenario.to_dict(),
        per_outcome=rows,
        discard_probability=result.discard_probability,
        totals=totals,
        tolerance=tolerance,
        timing_ms=(time.perf_counter() - start) * 1e3,
        mode_labels=mode_labels(scenario.dims),
        montecarlo=mc_stats,
    )
