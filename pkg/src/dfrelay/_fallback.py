"""Pure-Python batch selection, used when the compiled kernel is unavailable."""

from __future__ import annotations

from . import strategies
from .model import SnrTrellis

CODES = {"optimal": 0, "hop": 1, "adhoc": 2, "block": 3, "sliding": 4, "brute": 5}
_BY_CODE = {v: k for k, v in CODES.items()}


def select_batch(snr, hops, relays, strategy, w, paths, bottleneck):
    name = _BY_CODE[strategy]
    for r in range(snr.shape[0]):
        trellis = SnrTrellis.from_flat(snr[r], hops, relays)
        if name == "sliding":
            nodes = strategies.sliding_nodes(trellis, w)[1:]
        elif name == "block":
            nodes = strategies.select_block(trellis, w).zero_based()
        else:
            nodes = strategies.select(trellis, name).zero_based()
        paths[r, :] = nodes
        bottleneck[r] = min(
            trellis.link(h, a, b) for h, (a, b) in enumerate(zip((0, *nodes), (*nodes, 0)))
        )
