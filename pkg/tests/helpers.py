import numpy as np

from hebbian_anomaly.core import TemporalGraph, Window
from hebbian_anomaly.learn import MemoryNetwork


def make_network(n, weights, window=None):
    """MemoryNetwork from ``{(i, j): w}`` (one orientation per edge)."""
    items = sorted(((min(i, j), max(i, j)), w) for (i, j), w in weights.items())
    edges = np.array([e for e, _ in items], dtype=np.int64).reshape(-1, 2)
    wts = np.array([w for _, w in items], dtype=float)
    return MemoryNetwork(window or Window(0, 2), n, edges, wts)


def make_graph(n, edges, series):
    return TemporalGraph(n, edges, np.asarray(series, dtype=float))
