"""Hebbian edge-weight learning over time windows.

Each input edge accumulates a weight from the co-activity of its two endpoints,
one time step at a time. Only edges of the input graph are ever considered,
so a window costs O(E * T) regardless of how many nodes there are.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import TemporalGraph, Window
from .errors import InvalidActivity, InvalidConfig, InvalidWindow

SIMILARITIES = ("ratio", "product", "gaussian")

# Upper bound on edge*time cells materialized per chunk (~32 MB of float64).
_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class LearnConfig:
    lam: float = 0.5
    alpha: float = 0.0
    similarity: str = "ratio"
    prune_below: float = 0.0

    def __post_init__(self):
        if self.similarity not in SIMILARITIES:
            raise InvalidConfig(f"unknown similarity {self.similarity!r}")
        if not (self.lam >= 0 and self.alpha >= 0 and self.prune_below >= 0):
            raise InvalidConfig("lambda, alpha and prune_below must be >= 0")


@dataclass(frozen=True, eq=False)
class MemoryNetwork:
    """Learned weighted graph for one window.

    Edges are stored once as ``(i, j)`` with ``i < j``, in lexicographic order,
    with strictly positive weights above the pruning threshold.
    """

    window: Window
    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray

    @property
    def n_edges(self):
        return len(self.weights)

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def weight(self, i, j):
        i, j = min(i, j), max(i, j)
        hit = np.flatnonzero((self.edges[:, 0] == i) & (self.edges[:, 1] == j))
        return float(self.weights[hit[0]]) if len(hit) else 0.0

    def weight_map(self):
        """Symmetric ``{(i, j): w}`` dict holding both orientations."""
        out = {}
        for (i, j), w in zip(self.edges.tolist(), self.weights.tolist()):
            out[(i, j)] = w
            out[(j, i)] = w
        return out

    def to_csr(self):
        """Symmetric sparse weight matrix with zero diagonal."""
        n = self.n_nodes
        if not self.n_edges:
            return sp.csr_matrix((n, n), dtype=np.float64)
        i, j = self.edges[:, 0], self.edges[:, 1]
        m = sp.coo_matrix(
            (np.concatenate([self.weights, self.weights]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(n, n),
        )
        return m.tocsr()

    def degrees(self):
        """Weighted degree of every node."""
        d = np.zeros(self.n_nodes)
        np.add.at(d, self.edges[:, 0], self.weights)
        np.add.at(d, self.edges[:, 1], self.weights)
        return d


def activity(x, mask):
    """Raw values gated by the burst mask."""
    x = np.asarray(x, dtype=np.float64)
    mask = np.asarray(mask)
    if x.shape != mask.shape:
        raise InvalidWindow(f"series shape {x.shape} != mask shape {mask.shape}")
    return x * mask


def similarity(a, b, kind="ratio"):
    """Similarity of two scalar activities (both-zero is always 0)."""
    if kind == "ratio":
        if a < 0 or b < 0:
            raise InvalidActivity("ratio similarity needs non-negative activity")
        if a == 0 and b == 0:
            return 0.0
        return min(a, b) / max(a, b)
    if kind == "product":
        return a * b
    if kind == "gaussian":
        if a == 0 and b == 0:
            return 0.0
        return math.exp(-((a - b) ** 2))
    raise InvalidConfig(f"unknown similarity {kind!r}")


def similarity_array(a, b, kind="ratio"):
    if kind == "ratio":
        mx = np.maximum(a, b)
        out = np.zeros(np.broadcast(a, b).shape)
        np.divide(np.minimum(a, b), mx, out=out, where=mx > 0)
        return out
    if kind == "product":
        return a * b
    if kind == "gaussian":
        out = np.exp(-((a - b) ** 2))
        out[(a == 0) & (b == 0)] = 0.0
        return out
    raise InvalidConfig(f"unknown similarity {kind!r}")


def _window_activity(acts, n_nodes, n_steps, w):
    acts = np.asarray(acts, dtype=np.float64)
    if acts.ndim != 2 or acts.shape[0] != n_nodes:
        raise InvalidWindow(f"activity must have {n_nodes} rows, got shape {acts.shape}")
    if w.end > n_steps:
        raise InvalidWindow(f"window [{w.start}, {w.end}) exceeds series length {n_steps}")
    if acts.shape[1] == n_steps:
        return acts[:, w.slice()]
    if acts.shape[1] == len(w):
        return acts
    raise InvalidWindow(f"activity length {acts.shape[1]} fits neither window {len(w)} nor series {n_steps}")


def edge_weights(edges, y, cfg: LearnConfig):
    """Accumulated (unclamped) weight per edge over the columns of ``y``.

    Time steps are summed strictly left to right, so the result is exactly the
    sequential per-step update.
    """
    n_edges = len(edges)
    out = np.zeros(n_edges)
    steps = y.shape[1]
    if n_edges == 0 or steps == 0:
        return out
    chunk = max(1, _CHUNK_CELLS // steps)
    for s in range(0, n_edges, chunk):
        e = edges[s : s + chunk]
        sim = similarity_array(y[e[:, 0]], y[e[:, 1]], cfg.similarity)
        dw = np.where(sim > cfg.lam, sim, -cfg.alpha * sim)
        out[s : s + chunk] = np.cumsum(dw, axis=1)[:, -1]
    return out


def learn_window(g: TemporalGraph, acts, cfg: LearnConfig, w: Window) -> MemoryNetwork:
    """Learn the memory network of one window.

    ``acts`` is the activity matrix, either for the whole series or for just
    the window. Weights start at 0, are clamped at 0 from below and pruned at
    ``cfg.prune_below``.
    """
    y = _window_activity(acts, g.n_nodes, g.n_steps, w)
    if cfg.similarity == "ratio" and (y < 0).any():
        raise InvalidActivity("ratio similarity needs non-negative activity")
    edges = g.edges
    if cfg.similarity in ("ratio", "product") and len(edges):
        # Both-zero steps add exactly 0, so an edge with an endpoint that is
        # silent for the whole window ends at weight 0.
        active = (y != 0).any(axis=1)
        edges = edges[active[edges[:, 0]] & active[edges[:, 1]]]
    wts = np.maximum(edge_weights(edges, y, cfg), 0.0)
    keep = wts > cfg.prune_below
    return MemoryNetwork(w, g.n_nodes, edges[keep].copy(), wts[keep])


def activity_matrix(g: TemporalGraph, profile):
    """Activity for every node of ``g`` over the full series."""
    return activity(g.series, profile.mask)


def learn_all_windows(g: TemporalGraph, profile, cfg: LearnConfig, windows, jobs=1):
    """One independent memory network per window, in window order."""
    acts = activity_matrix(g, profile)
    if cfg.similarity == "ratio" and (acts < 0).any():
        raise InvalidActivity("ratio similarity needs non-negative activity")
    if jobs is None or jobs <= 1 or len(windows) <= 1:
        return [learn_window(g, acts, cfg, w) for w in windows]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda w: learn_window(g, acts, cfg, w), windows))
