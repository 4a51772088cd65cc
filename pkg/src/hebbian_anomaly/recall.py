"""Associative recall of event patterns from a learned memory network.

A pattern is an ``(n_nodes, window_length)`` int8 matrix of +1 (active) and
-1 (inactive) entries. Recall iterates ``P <- h(W @ P)`` synchronously, where
``h`` maps entries strictly above the threshold to +1 and everything else to -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import Window
from .errors import InvalidConfig, InvalidPattern

CONVERGED = "converged"
CYCLE = "cycle-detected"
MAX_ITERS = "max-iters"


@dataclass(frozen=True)
class RecallConfig:
    theta: float = 0.0
    # Any value below 2 means "stop only at an exact fixed point" for +/-1 patterns.
    epsilon: float = 1.0
    max_iters: int = 100

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidConfig("epsilon must be > 0")
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be >= 1")


@dataclass(frozen=True, eq=False)
class RecallResult:
    pattern: np.ndarray
    iterations: int
    status: str


def check_pattern(p, n_nodes=None, length=None):
    p = np.asarray(p)
    if p.ndim != 2:
        raise InvalidPattern(f"pattern must be 2-D, got shape {p.shape}")
    if n_nodes is not None and p.shape[0] != n_nodes:
        raise InvalidPattern(f"pattern has {p.shape[0]} rows, network has {n_nodes} nodes")
    if length is not None and p.shape[1] != length:
        raise InvalidPattern(f"pattern has {p.shape[1]} columns, window has {length} steps")
    if not np.isin(p, (-1, 1)).all():
        raise InvalidPattern("pattern entries must be -1 or +1")
    return p.astype(np.int8, copy=False)


def build_initial_pattern(n_nodes, window, active):
    """Start pattern: all -1 except +1 where a seeded node's burst mask is set.

    ``active`` maps node id to its 0/1 burst mask over ``window``.
    """
    length = len(window) if isinstance(window, Window) else int(window)
    p = np.full((n_nodes, length), -1, dtype=np.int8)
    for node, mask in active.items():
        if not 0 <= node < n_nodes:
            raise InvalidPattern(f"node {node} not in [0, {n_nodes})")
        mask = np.asarray(mask)
        if mask.shape != (length,):
            raise InvalidPattern(f"mask for node {node} has length {mask.size}, window has {length}")
        p[node, mask != 0] = 1
    return p


def _as_matrix(w):
    if hasattr(w, "to_csr"):
        return w.to_csr()
    if sp.issparse(w):
        return w.tocsr()
    return np.asarray(w, dtype=np.float64)


def hopfield_step(w, p, theta=0.0):
    """One synchronous update of every entry of ``p``."""
    m = _as_matrix(w)
    p = check_pattern(p, n_nodes=m.shape[0])
    field = m @ p.astype(np.float64)
    return np.where(field > theta, 1, -1).astype(np.int8)


def recall(w, p0, cfg: RecallConfig = RecallConfig()) -> RecallResult:
    """Iterate until a fixed point (within ``epsilon``), a 2-cycle or ``max_iters``."""
    m = _as_matrix(w)
    prev = None
    cur = check_pattern(p0, n_nodes=m.shape[0])
    for it in range(1, cfg.max_iters + 1):
        nxt = hopfield_step(m, cur, cfg.theta)
        diff = np.sqrt(np.sum((nxt.astype(np.int64) - cur) ** 2))
        if diff <= cfg.epsilon:
            return RecallResult(nxt, it, CONVERGED)
        if prev is not None and np.array_equal(nxt, prev):
            return RecallResult(nxt, it, CYCLE)
        prev, cur = cur, nxt
    return RecallResult(cur, cfg.max_iters, MAX_ITERS)
