"""Network configuration, random SNR trellis, relay paths and the rate objective.

Every link SNR is an exponential random variable with mean ``snr_scale``
(Rayleigh fading amplitude, squared).  A trellis can also be stored flat, one
row per realization, in the draw order

    first hop (M values), each middle hop row-major (M*M values), last hop (M values)

which is the layout consumed by the batch kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Invalid network dimensions or mismatched trellis/path sizes."""


class ParameterError(ValueError):
    """A strategy parameter (window/block size, user count) is out of range."""


class ResourceError(RuntimeError):
    """A computation would exceed a configured size cap."""


@dataclass(frozen=True)
class NetworkConfig:
    hops: int
    relays_per_hop: int
    snr_scale: float = 1.0

    def __post_init__(self):
        if int(self.hops) != self.hops or self.hops < 2:
            raise ConfigurationError(f"hops must be an integer >= 2, got {self.hops!r}")
        if int(self.relays_per_hop) != self.relays_per_hop or self.relays_per_hop < 1:
            raise ConfigurationError(
                f"relays_per_hop must be an integer >= 1, got {self.relays_per_hop!r}"
            )
        if not (self.snr_scale > 0 and math.isfinite(self.snr_scale)):
            raise ConfigurationError(f"snr_scale must be positive, got {self.snr_scale!r}")

    @classmethod
    def from_db(cls, hops: int, relays_per_hop: int, snr_db: float) -> "NetworkConfig":
        return cls(hops, relays_per_hop, 10.0 ** (snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr_scale)

    @property
    def n_links(self) -> int:
        return n_links(self.hops, self.relays_per_hop)

    @property
    def n_paths(self) -> int:
        return self.relays_per_hop ** (self.hops - 1)


def n_links(hops: int, relays: int) -> int:
    return 2 * relays + (hops - 2) * relays * relays


@dataclass(frozen=True)
class RelayPath:
    """Relay index (1-based) chosen at each of the L-1 intermediate hops."""

    relays: tuple

    def __post_init__(self):
        object.__setattr__(self, "relays", tuple(int(r) for r in self.relays))
        if any(r < 1 for r in self.relays):
            raise ConfigurationError(f"relay indices are 1-based, got {self.relays}")

    def __len__(self):
        return len(self.relays)

    def __iter__(self):
        return iter(self.relays)

    def __getitem__(self, i):
        return self.relays[i]

    @classmethod
    def from_zero_based(cls, idx: Sequence[int]) -> "RelayPath":
        return cls(tuple(int(i) + 1 for i in idx))

    def zero_based(self) -> tuple:
        return tuple(r - 1 for r in self.relays)


class SnrTrellis:
    """One realization of all link SNRs.

    ``first_hop[j]`` is source -> relay j, ``mid_hops[h][i, j]`` is relay i of
    layer h+1 -> relay j of layer h+2, and ``last_hop[i]`` is relay i ->
    destination.  Arrays are stored read-only.
    """

    __slots__ = ("first_hop", "mid_hops", "last_hop")

    def __init__(self, first_hop, mid_hops, last_hop):
        first = np.array(first_hop, dtype=float)
        last = np.array(last_hop, dtype=float)
        m = first.shape[0] if first.ndim == 1 else -1
        if first.ndim != 1 or m < 1 or last.shape != (m,):
            raise ConfigurationError(
                f"first/last hop must be vectors of equal length, got {first.shape} and {last.shape}"
            )
        mids = np.array(mid_hops, dtype=float).reshape(-1, m, m) if len(mid_hops) else np.zeros((0, m, m))
        for arr in (first, mids, last):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ConfigurationError("link SNRs must be finite and nonnegative")
            arr.setflags(write=False)
        object.__setattr__(self, "first_hop", first)
        object.__setattr__(self, "mid_hops", mids)
        object.__setattr__(self, "last_hop", last)

    def __setattr__(self, name, value):
        raise AttributeError("SnrTrellis is immutable")

    @property
    def relays_per_hop(self) -> int:
        return self.first_hop.shape[0]

    @property
    def hops(self) -> int:
        return self.mid_hops.shape[0] + 2

    def link(self, hop: int, i: int, j: int) -> float:
        """SNR of hop ``hop`` (0-based) from node ``i`` to node ``j``.

        Source and destination are node 0 of their single-node layers.
        """
        if hop == 0:
            return float(self.first_hop[j])
        if hop == self.hops - 1:
            return float(self.last_hop[i])
        return float(self.mid_hops[hop - 1, i, j])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.first_hop, self.mid_hops.ravel(), self.last_hop])

    @classmethod
    def from_flat(cls, row, hops: int, relays: int) -> "SnrTrellis":
        row = np.asarray(row, dtype=float)
        if row.shape != (n_links(hops, relays),):
            raise ConfigurationError(
                f"flat trellis for L={hops}, M={relays} needs {n_links(hops, relays)} entries, "
                f"got {row.shape}"
            )
        m = relays
        return cls(row[:m], row[m:-m].reshape(hops - 2, m, m), row[-m:])

    def __eq__(self, other):
        if not isinstance(other, SnrTrellis):
            return NotImplemented
        return (
            np.array_equal(self.first_hop, other.first_hop)
            and np.array_equal(self.mid_hops, other.mid_hops)
            and np.array_equal(self.last_hop, other.last_hop)
        )

    __hash__ = None

    def __repr__(self):
        return f"SnrTrellis(L={self.hops}, M={self.relays_per_hop})"


def exponential_from_uniform(u, snr_scale: float):
    """Inverse-CDF transform of uniforms in [0, 1) to Exponential(mean=snr_scale)."""
    return -snr_scale * np.log1p(-np.asarray(u, dtype=float))


def sample_trellis(config: NetworkConfig, rng: np.random.Generator) -> SnrTrellis:
    """Draw one trellis; consumes exactly ``config.n_links`` uniforms in flat order."""
    row = exponential_from_uniform(rng.random(config.n_links), config.snr_scale)
    return SnrTrellis.from_flat(row, config.hops, config.relays_per_hop)


def path_bottleneck(trellis: SnrTrellis, path: RelayPath) -> float:
    L = trellis.hops
    if len(path) != L - 1:
        raise ConfigurationError(f"path has {len(path)} relays, trellis needs {L - 1}")
    if max(path.relays, default=1) > trellis.relays_per_hop:
        raise ConfigurationError(f"relay index out of range for M={trellis.relays_per_hop}")
    nodes = (0,) + path.zero_based() + (0,)
    return min(trellis.link(h, nodes[h], nodes[h + 1]) for h in range(L))


def rate_of_snr(snr: float) -> float:
    """Achievable rate log2(1 + snr) in bits/s/Hz."""
    if snr < 0:
        raise ValueError(f"SNR must be nonnegative, got {snr}")
    return math.log2(1.0 + snr)
