"""Anomalous cluster extraction: components, Louvain communities, cluster activity."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components as _cc

from .core import TemporalGraph, Window
from .errors import InvalidCluster, UndefinedModularity

DEFAULT_SEED = 0


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: np.ndarray
    n_communities: int
    modularity: float

    def communities(self):
        """Member arrays, indexed by community id."""
        order = np.argsort(self.assignment, kind="stable")
        cuts = np.flatnonzero(np.diff(self.assignment[order])) + 1
        return np.split(order, cuts) if len(order) else []


@dataclass
class ClusterReport:
    window_id: int
    cluster_id: int
    kind: str  # "component" or "community"
    window: Window
    nodes: list
    labels: list | None
    modularity: float
    peak_time: int
    total_activity: np.ndarray
    raw_activity: np.ndarray = field(repr=False)

    @property
    def size(self):
        return len(self.nodes)

    @property
    def partial(self):
        return self.window.partial


def _relabel(assignment):
    """Renumber communities 0..k-1 in order of their smallest member."""
    _, first, inv = np.unique(assignment, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.ravel()]


def connected_components(w):
    """Node sets joined by positive-weight edges, largest first (ties: smallest id)."""
    n = w.n_nodes
    if n == 0:
        return []
    _, labels = _cc(w.to_csr(), directed=False)
    groups = {}
    for node, lab in enumerate(labels.tolist()):
        groups.setdefault(lab, []).append(node)
    comps = [np.array(g, dtype=np.int64) for g in groups.values()]
    comps.sort(key=lambda c: (-len(c), int(c[0])))
    return comps


def modularity(w, assignment, resolution=1.0):
    """Weighted Newman modularity of ``assignment`` on the network ``w``."""
    assignment = np.asarray(assignment)
    m = w.total_weight
    if not m > 0:
        raise UndefinedModularity("network has zero total weight")
    comm = _relabel(assignment)
    k = len(np.unique(comm))
    inside = np.zeros(k)
    e = w.edges
    same = comm[e[:, 0]] == comm[e[:, 1]]
    np.add.at(inside, comm[e[same, 0]], 2 * w.weights[same])
    tot = np.zeros(k)
    np.add.at(tot, comm, w.degrees())
    return float(np.sum(inside / (2 * m) - resolution * (tot / (2 * m)) ** 2))


def _one_level(nbrs, degrees, node2com, m, resolution, rng):
    """Local-move phase. Mutates ``node2com``; returns True if anything moved."""
    n = len(nbrs)
    stot = np.zeros(n)
    np.add.at(stot, node2com, degrees)
    stot = stot.tolist()
    improved = False
    two_m2 = 2.0 * m * m
    while True:
        moves = 0
        for u in rng.permutation(n).tolist():
            cur = node2com[u]
            deg = degrees[u]
            w2c = {}
            for v, wt in nbrs[u].items():
                c = node2com[v]
                w2c[c] = w2c.get(c, 0.0) + wt
            stot[cur] -= deg
            remove_cost = -w2c.get(cur, 0.0) / m + resolution * stot[cur] * deg / two_m2
            best, best_gain = cur, 0.0
            for c, wt in w2c.items():
                gain = remove_cost + wt / m - resolution * stot[c] * deg / two_m2
                if gain > best_gain:
                    best, best_gain = c, gain
            stot[best] += deg
            if best != cur:
                node2com[u] = best
                moves += 1
        if moves == 0:
            return improved
        improved = True


def _aggregate(nbrs, selfloops, node2com):
    comm = _relabel(np.asarray(node2com))
    k = int(comm.max()) + 1 if len(comm) else 0
    new_nbrs = [dict() for _ in range(k)]
    new_self = [0.0] * k
    for u, adj in enumerate(nbrs):
        cu = comm[u]
        new_self[cu] += selfloops[u]
        for v, wt in adj.items():
            if v < u:
                continue
            cv = comm[v]
            if cu == cv:
                new_self[cu] += wt
            else:
                new_nbrs[cu][cv] = new_nbrs[cu].get(cv, 0.0) + wt
                new_nbrs[cv][cu] = new_nbrs[cv].get(cu, 0.0) + wt
    return new_nbrs, new_self, comm


def louvain(w, resolution=1.0, seed=DEFAULT_SEED) -> Partition:
    """Greedy modularity optimisation by local moves and graph aggregation.

    Node visiting order is drawn from ``seed``, so results are reproducible.
    """
    m = w.total_weight
    if not m > 0:
        raise UndefinedModularity("network has zero total weight")
    rng = np.random.default_rng(seed)
    n = w.n_nodes
    nbrs = [dict() for _ in range(n)]
    for (i, j), wt in zip(w.edges.tolist(), w.weights.tolist()):
        nbrs[i][j] = wt
        nbrs[j][i] = wt
    selfloops = [0.0] * n
    membership = np.arange(n)

    q = modularity(w, membership, resolution)
    while True:
        degrees = [sum(adj.values()) + 2 * s for adj, s in zip(nbrs, selfloops)]
        node2com = list(range(len(nbrs)))
        if not _one_level(nbrs, degrees, node2com, m, resolution, rng):
            break
        nbrs, selfloops, comm = _aggregate(nbrs, selfloops, node2com)
        candidate = comm[membership]
        new_q = modularity(w, candidate, resolution)
        if new_q - q <= 1e-12:
            break
        membership, q = candidate, new_q

    membership = _relabel(membership)
    return Partition(membership, int(membership.max()) + 1 if n else 0, modularity(w, membership, resolution))


def normalize_activity(s):
    """Scale to [0, 100] with 0 anchoring the bottom; all-zero stays zero."""
    s = np.asarray(s, dtype=np.float64)
    lo = min(0.0, float(s.min())) if len(s) else 0.0
    hi = float(s.max()) if len(s) else 0.0
    if hi == lo:
        return np.zeros_like(s)
    return (s - lo) / (hi - lo) * 100.0


def cluster_activity(nodes, g: TemporalGraph, window: Window | None = None):
    """Summed raw activity of ``nodes`` and its [0, 100] normalisation.

    Returns ``(normalized, raw)``; with no window the full series is used.
    """
    nodes = np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64)
    if len(nodes) == 0:
        raise InvalidCluster("cluster has no nodes")
    sl = window.slice() if window is not None else slice(None)
    raw = g.series[nodes, sl].sum(axis=0)
    return normalize_activity(raw), raw


def network_stats(w, partition: Partition | None = None):
    """Counts, modularity and the weighted-degree / community-size histograms."""
    deg = np.round(w.degrees(), 6)
    deg_hist = sorted(Counter(deg.tolist()).items())
    stats = {
        "n_nodes": w.n_nodes,
        "n_edges": w.n_edges,
        "total_weight": w.total_weight,
        "weighted_degree_histogram": [[d, c] for d, c in deg_hist],
    }
    if partition is not None:
        sizes = Counter(np.bincount(partition.assignment).tolist()) if w.n_nodes else Counter()
        stats["modularity"] = partition.modularity
        stats["n_communities"] = partition.n_communities
        stats["community_size_histogram"] = [[s, c] for s, c in sorted(sizes.items())]
    return stats


def extract_clusters(w, g: TemporalGraph, id_map=None, labels=None, *, window_id=0,
                     resolution=1.0, seed=DEFAULT_SEED, min_size=2):
    """Reports for every component of at least ``min_size`` nodes, plus the
    Louvain communities inside the largest component.

    ``g`` is the graph the network was learned on (same node indexing);
    reported node ids are mapped through ``id_map`` when given. Returns
    ``(partition, reports)``; the partition is ``None`` for an edgeless network.
    """
    if w.n_edges == 0:
        return None, []
    part = louvain(w, resolution, seed)
    comps = [c for c in connected_components(w) if len(c) >= min_size]
    groups = [("component", c) for c in comps]
    if comps:
        lcc = comps[0]
        inside = part.assignment[lcc]
        for cid in np.unique(inside):
            members = lcc[inside == cid]
            if len(members) >= min_size and len(members) < len(lcc):
                groups.append(("community", members))

    reports = []
    for idx, (kind, members) in enumerate(groups):
        norm, raw = cluster_activity(members, g, w.window)
        orig = [int(x) for x in (np.asarray(id_map)[members] if id_map is not None else members)]
        names = [labels.get(x, str(x)) for x in orig] if labels is not None else None
        reports.append(ClusterReport(
            window_id=window_id,
            cluster_id=idx,
            kind=kind,
            window=w.window,
            nodes=orig,
            labels=names,
            modularity=part.modularity,
            peak_time=w.window.start + int(np.argmax(raw)),
            total_activity=norm,
            raw_activity=raw,
        ))
    return part, reports
