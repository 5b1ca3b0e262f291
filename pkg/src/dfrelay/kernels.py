"""Batch relay selection over many flat trellises.

Uses the compiled ``_kernels`` extension when it has been built, otherwise the
pure-Python loop in ``_fallback``.  Set ``DFRELAY_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback, strategies
from .model import ConfigurationError, ResourceError
from .strategies import check_block_size, check_window_size

CODES = _fallback.CODES

if os.environ.get("DFRELAY_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel not built; reinstall the package")
        return _compiled.select_batch
    if backend == "python":
        return _fallback.select_batch
    raise ValueError(f"unknown backend {backend!r}")


def select_batch(snr, hops: int, relays: int, strategy: str, w: int | None = None,
                 backend: str | None = None):
    """Apply ``strategy`` to each row of ``snr`` (shape ``(n, n_links)``).

    Returns ``(paths, bottleneck)``: 0-based relay indices of shape
    ``(n, hops - 1)`` and the bottleneck SNR per row.  ``w`` is the block or
    window size; for ``sliding`` a window of 1 means hop-by-hop.
    """
    if strategy not in CODES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    if strategy == "brute" and relays ** (hops - 1) > strategies.BRUTE_FORCE_LIMIT:
        raise ResourceError(
            f"{relays}^{hops - 1} paths exceeds the brute-force limit of {strategies.BRUTE_FORCE_LIMIT}"
        )
    if strategy == "block":
        w = 2 if w is None else w
        check_block_size(hops, w)
    elif strategy == "sliding":
        w = 2 if w is None else w
        check_window_size(hops, w, allow_greedy=True)
    else:
        w = 0
    snr = np.ascontiguousarray(snr, dtype=np.float64)
    n = snr.shape[0]
    paths = np.zeros((n, hops - 1), dtype=np.intc)
    bottleneck = np.empty(n, dtype=np.float64)
    _impl(backend)(snr, hops, relays, CODES[strategy], int(w), paths, bottleneck)
    return paths, bottleneck
