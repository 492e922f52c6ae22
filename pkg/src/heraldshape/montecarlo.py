"""Seeded click-level sampling of the heralding pipeline.

Trials are split into fixed-size blocks. Block ``b`` draws from its own
Philox stream keyed by ``(seed, b)``, so counts do not depend on the order
(or the worker) in which blocks run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

BLOCK_SIZE = 1 << 14


@dataclass(frozen=True)
class ClickStats:
    trials: int
    clicks_per_outcome: list[int]
    discards: int
    empirical_rate: float
    rate_std_error: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _block_counts(cdf: np.ndarray, seed: int, block: int, size: int) -> np.ndarray:
    u = _block_rng(seed, block).random(size)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    return np.bincount(idx, minlength=cdf.size)


def sample_outcomes(probabilities, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Inverse-CDF sampling of ``trials`` categorical draws; returns per-category counts."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    p = np.clip(np.asarray(probabilities, dtype=float), 0, None)
    cdf = np.cumsum(p / p.sum())
    cdf[-1] = 1.0
    n_blocks = math.ceil(trials / BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, trials - b * BLOCK_SIZE) for b in range(n_blocks)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _block_counts(cdf, seed, b, sizes[b]), range(n_blocks)))
    else:
        parts = [_block_counts(cdf, seed, b, sizes[b]) for b in range(n_blocks)]
    return np.sum(parts, axis=0)


def simulate_clicks(scenario, trials: int, seed: int, workers: int = 1) -> ClickStats:
    """Sample detector outcomes and no-click discards from the exact distribution."""
    from .scenario import run_exact

    _, _, result = run_exact(scenario)
    clicks = result.detector_outcomes
    probs = [o.probability for o in clicks] + [result.discard_probability]
    counts = sample_outcomes(probs, trials, seed, workers)
    n_clicks = int(counts[:-1].sum())
    rate = n_clicks / trials
    return ClickStats(
        trials=trials,
        clicks_per_outcome=[int(c) for c in counts[:-1]],
        discards=int(counts[-1]),
        empirical_rate=rate,
        rate_std_error=math.sqrt(rate * (1 - rate) / trials),
        seed=seed,
    )
