"""Relay-selection strategies acting on a single trellis realization.

These are the reference (pure Python) implementations.  The batch kernels in
:mod:`dfrelay.kernels` run the same algorithms, with the same tie rule, over
many realizations at once.

All strategies are built from one primitive, a max-bottleneck dynamic
program over a run of consecutive hops (:func:`best_window`).  Ties at every
maximization go to the smallest index.
"""

from __future__ import annotations

import itertools

from .model import ConfigurationError, ParameterError, RelayPath, ResourceError, SnrTrellis

BRUTE_FORCE_LIMIT = 10**6

STRATEGIES = ("optimal", "brute", "hop", "adhoc", "block", "sliding")


def _layer_size(trellis: SnrTrellis, layer: int) -> int:
    return 1 if layer in (0, trellis.hops) else trellis.relays_per_hop


def best_window(trellis: SnrTrellis, start_hop: int, entry: int, n_hops: int):
    """Max-bottleneck path over hops ``start_hop .. start_hop+n_hops-1``.

    The path starts at node ``entry`` of layer ``start_hop``.  If the window
    reaches the destination the exit is fixed, otherwise it is free.  Returns
    ``(bottleneck, nodes)`` where ``nodes`` holds the chosen relay (0-based)
    for each relay layer inside the window.
    """
    L = trellis.hops
    end = start_hop + n_hops
    if n_hops < 1 or end > L:
        raise ParameterError(f"window [{start_hop}, {end}) does not fit in {L} hops")
    link = trellis.link
    value = [link(start_hop, entry, j) for j in range(_layer_size(trellis, start_hop + 1))]
    back = []
    for hop in range(start_hop + 1, end):
        new_value, pointers = [], []
        for j in range(_layer_size(trellis, hop + 1)):
            best, arg = -1.0, 0
            for i, v in enumerate(value):
                cand = min(v, link(hop, i, j))
                if cand > best:
                    best, arg = cand, i
            new_value.append(best)
            pointers.append(arg)
        back.append(pointers)
        value = new_value

    exit_node = max(range(len(value)), key=lambda j: (value[j], -j))
    nodes = [exit_node]
    for pointers in reversed(back):
        nodes.append(pointers[nodes[-1]])
    nodes.reverse()
    if end == L:
        nodes.pop()
    return value[exit_node], nodes


def select_brute_force(trellis: SnrTrellis) -> RelayPath:
    """Exhaustive search; ties go to the lexicographically smallest relay vector."""
    L, M = trellis.hops, trellis.relays_per_hop
    if M ** (L - 1) > BRUTE_FORCE_LIMIT:
        raise ResourceError(f"{M}^{L - 1} paths exceeds brute-force limit {BRUTE_FORCE_LIMIT}")
    best, best_path = -1.0, None
    for relays in itertools.product(range(M), repeat=L - 1):
        nodes = (0,) + relays + (0,)
        value = min(trellis.link(h, nodes[h], nodes[h + 1]) for h in range(L))
        if value > best:
            best, best_path = value, relays
    return RelayPath.from_zero_based(best_path)


def select_optimal(trellis: SnrTrellis) -> RelayPath:
    _, nodes = best_window(trellis, 0, 0, trellis.hops)
    return RelayPath.from_zero_based(nodes)


def _greedy(trellis: SnrTrellis, upto: int) -> list:
    """Hop-by-hop choices for relay layers 1..upto."""
    nodes = [0]
    for hop in range(upto):
        nodes.append(best_window(trellis, hop, nodes[-1], 1)[1][0])
    return nodes


def select_hop_by_hop(trellis: SnrTrellis) -> RelayPath:
    return RelayPath.from_zero_based(_greedy(trellis, trellis.hops - 1)[1:])


def select_ad_hoc(trellis: SnrTrellis) -> RelayPath:
    L = trellis.hops
    nodes = _greedy(trellis, L - 2)
    nodes += best_window(trellis, L - 2, nodes[-1], 2)[1]
    return RelayPath.from_zero_based(nodes[1:])


def check_block_size(hops: int, w: int) -> None:
    if int(w) != w or w < 2:
        raise ParameterError(f"block size must be an integer >= 2, got {w!r}")
    if w < hops and hops % w == 1:
        raise ParameterError(
            f"L={hops} with block size {w} leaves a one-hop final block; "
            "the last hop would have no choice"
        )


def select_block(trellis: SnrTrellis, w: int = 2) -> RelayPath:
    L = trellis.hops
    check_block_size(L, w)
    nodes = [0]
    start = 0
    while start < L:
        size = min(w, L - start)
        nodes += best_window(trellis, start, nodes[-1], size)[1]
        start += size
    return RelayPath.from_zero_based(nodes[1:])


def check_window_size(hops: int, w: int, allow_greedy: bool = False) -> None:
    low = 1 if allow_greedy else 2
    if int(w) != w or not low <= w <= hops:
        raise ParameterError(f"window size must be in [{low}, {hops}], got {w!r}")


def sliding_nodes(trellis: SnrTrellis, w: int) -> list:
    """Sliding-window choices (0-based, with the source node prepended).

    ``w == 1`` degenerates to hop-by-hop selection.
    """
    L = trellis.hops
    nodes = [0]
    for t in range(L - w):
        nodes.append(best_window(trellis, t, nodes[-1], w)[1][0])
    nodes += best_window(trellis, L - w, nodes[-1], w)[1]
    return nodes


def select_sliding(trellis: SnrTrellis, w: int = 2) -> RelayPath:
    check_window_size(trellis.hops, w)
    return RelayPath.from_zero_based(sliding_nodes(trellis, w)[1:])


def select(trellis: SnrTrellis, strategy: str, w: int | None = None) -> RelayPath:
    """Dispatch by strategy name (see :data:`STRATEGIES`)."""
    if strategy == "optimal":
        return select_optimal(trellis)
    if strategy == "brute":
        return select_brute_force(trellis)
    if strategy == "hop":
        return select_hop_by_hop(trellis)
    if strategy == "adhoc":
        return select_ad_hoc(trellis)
    if strategy == "block":
        return select_block(trellis, 2 if w is None else w)
    if strategy == "sliding":
        return select_sliding(trellis, 2 if w is None else w)
    raise ConfigurationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
