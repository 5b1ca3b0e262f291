"""Seeded Monte Carlo estimation of achievable rates.

Trials are grouped into fixed blocks of :data:`BLOCK_TRIALS`.  Block ``k``
draws its uniforms from a Philox stream keyed by ``SeedSequence(seed,
spawn_key=(k,))``, so every trial sees the same trellis no matter how many
worker threads process the blocks or in which order.  Within a block each
row is one trial in the flat draw order of :func:`dfrelay.model.sample_trellis`.

Strategies evaluated in one call share the same trellises (paired trials).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import NetworkConfig, ParameterError, exponential_from_uniform

BLOCK_TRIALS = 4096


@dataclass(frozen=True)
class RateEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    strategy: str
    w: int | None = None


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _resolve_threads(threads: int) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def _normalize_strategy(name: str, w):
    if name in ("block", "sliding"):
        return name, 2 if w is None else int(w)
    return name, None


def simulate_bottlenecks(config: NetworkConfig, strategies, trials: int, seed: int,
                         threads: int = 1, users: int = 1, backend: str | None = None):
    """Per-trial bottleneck SNRs for each ``(name, w)`` in ``strategies``.

    Returns a dict keyed by ``(name, w)`` of arrays with shape
    ``(trials, users)``; all strategies act on the same trellises.
    """
    if int(trials) != trials or trials < 1:
        raise ParameterError(f"trials must be a positive integer, got {trials!r}")
    keys = [_normalize_strategy(*s) for s in strategies]
    L, M = config.hops, config.relays_per_hop
    links = config.n_links
    n_blocks = -(-trials // BLOCK_TRIALS)

    # validate parameters up front so workers never raise
    probe = np.ones((1, links))
    for name, w in keys:
        kernels.select_batch(probe, L, M, name, w, backend=backend)

    def run(block):
        n = min(BLOCK_TRIALS, trials - block * BLOCK_TRIALS)
        u = block_generator(seed, block).random((n, users * links))
        snr = exponential_from_uniform(u, config.snr_scale).reshape(n * users, links)
        return {
            key: kernels.select_batch(snr, L, M, key[0], key[1], backend=backend)[1].reshape(n, users)
            for key in keys
        }

    workers = min(_resolve_threads(threads), n_blocks)
    if workers == 1:
        parts = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    return {key: np.concatenate([p[key] for p in parts]) for key in keys}


def rates_from_bottleneck(bottleneck: np.ndarray) -> np.ndarray:
    """Per-trial rate summed over users."""
    return np.log2(1.0 + bottleneck).sum(axis=1)


def summarize(rates: np.ndarray):
    """Exactly rounded mean and standard error of the per-trial rates."""
    n = len(rates)
    mean = math.fsum(rates) / n
    if n < 2:
        return mean, float("nan")
    var = math.fsum((rates - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate_rate(config: NetworkConfig, strategy: str, w: int | None = None,
                  trials: int = 10_000, seed: int = 0, threads: int = 1,
                  backend: str | None = None) -> RateEstimate:
    name, w = _normalize_strategy(strategy, w)
    b = simulate_bottlenecks(config, [(name, w)], trials, seed, threads, backend=backend)[(name, w)]
    mean, se = summarize(rates_from_bottleneck(b))
    return RateEstimate(mean, se, int(trials), int(seed), name, w)


def estimate_many(config: NetworkConfig, strategies, trials: int, seed: int,
                  threads: int = 1, users: int = 1, backend: str | None = None) -> dict:
    """Paired estimates for several strategies on one trellis stream."""
    if users > config.relays_per_hop:
        raise ParameterError(f"{users} users need at least as many relays per hop (M={config.relays_per_hop})")
    sims = simulate_bottlenecks(config, strategies, trials, seed, threads, users, backend)
    out = {}
    for (name, w), b in sims.items():
        mean, se = summarize(rates_from_bottleneck(b))
        out[(name, w)] = RateEstimate(mean, se, int(trials), int(seed), name, w)
    return out


def estimate_sum_rate_multiuser(config: NetworkConfig, users: int, strategy: str,
                                w: int | None = None, trials: int = 10_000, seed: int = 0,
                                threads: int = 1, backend: str | None = None) -> RateEstimate:
    """Sum rate of ``users`` noise-limited users, each on its own trellis."""
    if int(users) != users or users < 1:
        raise ParameterError(f"users must be a positive integer, got {users!r}")
    key = _normalize_strategy(strategy, w)
    return estimate_many(config, [key], trials, seed, threads, users, backend)[key]


def effectiveness_row(config: NetworkConfig, windows, trials: int = 5000, seed: int = 0,
                      threads: int = 1, backend: str | None = None) -> dict:
    """Sliding-window mean rate as a percentage of the optimal mean rate.

    Every window size and the optimal reference run on the same trellises.
    ``w = 1`` is plain hop-by-hop selection.
    """
    L = config.hops
    windows = [int(w) for w in windows]
    for w in windows:
        if not 1 <= w <= L:
            raise ParameterError(f"window size must be in [1, {L}], got {w}")
    keys = [("optimal", None)] + [("sliding", w) for w in windows]
    sims = simulate_bottlenecks(config, keys, trials, seed, threads, backend=backend)
    ref = math.fsum(rates_from_bottleneck(sims[("optimal", None)]))
    return {w: 100.0 * math.fsum(rates_from_bottleneck(sims[("sliding", w)])) / ref for w in windows}


def effectiveness(config: NetworkConfig, w: int, trials: int = 5000, seed: int = 0,
                  threads: int = 1, backend: str | None = None) -> float:
    return effectiveness_row(config, [w], trials, seed, threads, backend)[int(w)]
