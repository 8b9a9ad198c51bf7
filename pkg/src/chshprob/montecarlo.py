"""Seeded Monte Carlo simulation of finite-round experiments.

Round-level sampling: every channel round is an independent fair +-1 draw,
an experiment is a full tally, and the violation frequency over many
experiments estimates the same probability the exact and analytic routes
compute.  Streams are derived from a user seed through numpy SeedSequence
spawning, so runs are reproducible bit-for-bit regardless of how many
workers execute the trial batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Iterator

import numpy as np

from .errors import InvalidConfigError
from .model import (
    CHANNEL_SIGNS,
    STRICT,
    ExperimentConfig,
    RoundTally,
    _check_threshold,
    _seed_entropy,
)

# Fixed batching rule: batch b of a run draws from the child stream
# SeedSequence(seed, spawn_key=(b,)).  Batch size depends only on the
# config (bounding the per-channel draw matrix), never on the worker
# count, which is what makes 1-worker and k-worker runs bit-identical.
BATCH_ELEMENT_BUDGET = 1 << 22
MAX_BATCH_TRIALS = 1 << 16

_Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class McEstimate:
    """Violation-frequency estimate with its 95% Wilson interval."""

    trials: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int
    threshold: str
    config: ExperimentConfig

    def __post_init__(self) -> None:
        if not 0 <= self.hits <= self.trials:
            raise InvalidConfigError(f"hits {self.hits} outside 0..{self.trials}")
        if not (0.0 <= self.ci_low <= self.estimate <= self.ci_high <= 1.0):
            raise InvalidConfigError(
                f"interval disordered: {self.ci_low} <= {self.estimate} <= {self.ci_high} required"
            )
        _check_threshold(self.threshold)


def wilson_interval(hits: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Chosen over the Wald interval because it stays sensible when hits is 0
    or tiny, the usual regime for rare violations.
    """
    if trials < 1 or not 0 <= hits <= trials:
        raise InvalidConfigError(f"need 0 <= hits <= trials, got hits={hits} trials={trials}")
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # the true interval always contains p; the clamps only absorb last-ulp rounding
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def fair_steps(rng: np.random.Generator, block: int = 1024) -> Iterator[int]:
    """Endless stream of fair +-1 steps drawn from ``rng`` one bit each."""
    while True:
        for bit in rng.integers(0, 2, size=block):
            yield 2 * int(bit) - 1


def simulate_experiment(config: ExperimentConfig, stream: Iterable[int]) -> RoundTally:
    """Run one experiment, consuming exactly sum(rounds) steps in channel order.

    ``stream`` yields the per-round product outcomes c = a*b as -1 or +1;
    channel k's rounds are the next n_k values.
    """
    it = iter(stream)
    sums = []
    for n in config.rounds:
        m = 0
        for _ in range(n):
            try:
                step = next(it)
            except StopIteration:
                raise ValueError("step stream exhausted mid-experiment") from None
            if step != 1 and step != -1:
                raise ValueError(f"step stream must yield -1 or +1, got {step!r}")
            m += int(step)
        sums.append(m)
    return RoundTally(m=tuple(sums), n=config.rounds)


def _batch_trials(rounds: tuple[int, ...]) -> int:
    return max(1, min(MAX_BATCH_TRIALS, BATCH_ELEMENT_BUDGET // max(rounds)))


def _batch_hits(
    rounds: tuple[int, ...],
    seed: int,
    batch_index: int,
    count: int,
    threshold: str,
    force_exact_sum: bool = False,
) -> int:
    """Violations among ``count`` experiments drawn from batch substream ``batch_index``.

    The violation test compares the integer sum_k sign_k*q_k*m_k against
    2*lcm(rounds), which is the correlation inequality with denominators
    cleared; int64 covers any |sum| up to 4*lcm, and configurations beyond
    that fall back to Python integers on the same draws.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=_seed_entropy(seed), spawn_key=(batch_index,))
    )
    scale = math.lcm(*rounds)
    bound = 2 * scale
    strict = threshold == STRICT
    coefficients = [sign * (scale // n) for sign, n in zip(CHANNEL_SIGNS, rounds)]

    if not force_exact_sum and 4 * scale < 2**62:
        acc = np.zeros(count, dtype=np.int64)
        for n, coefficient in zip(rounds, coefficients):
            steps = rng.integers(0, 2, size=(count, n), dtype=np.int8)
            acc += coefficient * (2 * steps.sum(axis=1, dtype=np.int64) - n)
        magnitudes = np.abs(acc)
        if strict:
            return int(np.count_nonzero(magnitudes > bound))
        return int(np.count_nonzero(magnitudes >= bound))

    # Same draws, arbitrary-precision accumulation.
    per_channel = []
    for n in rounds:
        steps = rng.integers(0, 2, size=(count, n), dtype=np.int8)
        per_channel.append(2 * steps.sum(axis=1, dtype=np.int64) - n)
    hits = 0
    for values in zip(*per_channel):
        total = abs(sum(c * int(v) for c, v in zip(coefficients, values)))
        hits += (total > bound) if strict else (total >= bound)
    return hits


def _batch_hits_args(args: tuple) -> int:
    return _batch_hits(*args)


def estimate_violation_probability(
    config: ExperimentConfig,
    trials: int,
    seed: int,
    threshold: str = STRICT,
    *,
    workers: int = 1,
) -> McEstimate:
    """Estimate the violation probability from ``trials`` simulated experiments.

    Deterministic in (seed, trials, config, threshold): trials are cut into
    fixed-size batches with per-batch substreams and hits are summed, so any
    worker count reproduces the sequential result exactly.
    """
    _check_threshold(threshold)
    if trials < 1:
        raise InvalidConfigError(f"trials must be >= 1, got {trials}")
    batch = _batch_trials(config.rounds)
    spans = [
        (config.rounds, seed, index, min(batch, trials - start), threshold)
        for index, start in enumerate(range(0, trials, batch))
    ]
    if workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(_batch_hits_args, spans))
    else:
        hits = sum(_batch_hits(*span) for span in spans)

    low, high = wilson_interval(hits, trials)
    return McEstimate(
        trials=trials,
        hits=hits,
        estimate=hits / trials,
        ci_low=low,
        ci_high=high,
        seed=seed,
        threshold=threshold,
        config=config,
    )
