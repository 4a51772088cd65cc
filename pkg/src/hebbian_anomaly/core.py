"""Graph + time-series data model and window arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, InvalidGraph, InvalidNode, InvalidSeries, MissingTimestamps


def _readonly(a):
    a.setflags(write=False)
    return a


def canonical_edges(edges, n_nodes=None, *, strict=True):
    """Return an ``(E, 2)`` int64 array of ``i < j`` pairs sorted lexicographically.

    With ``strict`` a self-loop or duplicate pair raises :class:`InvalidGraph`;
    otherwise they are dropped and the number dropped is returned alongside.
    """
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidGraph(f"edges must be pairs, got shape {arr.shape}")
    if n_nodes is not None and len(arr) and (arr.min() < 0 or arr.max() >= n_nodes):
        raise InvalidGraph(f"edge endpoint outside [0, {n_nodes})")
    loops = arr[:, 0] == arr[:, 1]
    if strict and loops.any():
        i = int(arr[loops][0, 0])
        raise InvalidGraph(f"self-loop on node {i}")
    arr = arr[~loops]
    arr = np.sort(arr, axis=1)
    uniq = np.unique(arr, axis=0) if len(arr) else arr
    if strict and len(uniq) != len(arr):
        raise InvalidGraph("duplicate edge")
    dropped = int(loops.sum()) + len(arr) - len(uniq)
    if strict:
        return uniq
    return uniq, dropped


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    """Static undirected graph whose nodes each carry one activity series.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``;
    ``series`` is an ``(n_nodes, n_steps)`` float array. Both are made read-only
    so a graph can be shared freely between threads.
    """

    n_nodes: int
    edges: np.ndarray
    series: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n_nodes)
        if n < 0:
            raise InvalidGraph("n_nodes must be non-negative")
        object.__setattr__(self, "n_nodes", n)
        object.__setattr__(self, "edges", _readonly(canonical_edges(self.edges, n)))

        series = np.array(self.series, dtype=np.float64)
        if series.ndim != 2 or series.shape[0] != n:
            raise InvalidSeries(f"series must have shape ({n}, T), got {series.shape}")
        if series.shape[1] < 2:
            raise InvalidSeries("series length T must be at least 2")
        if not np.isfinite(series).all():
            raise InvalidSeries("series contain non-finite values")
        object.__setattr__(self, "series", _readonly(series))

        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype="datetime64[s]")
            if ts.shape != (series.shape[1],):
                raise InvalidSeries("timestamps must have one entry per time step")
            if len(ts) > 1:
                d = np.diff(ts)
                if (d <= np.timedelta64(0, "s")).any() or (d != d[0]).any():
                    raise InvalidSeries("timestamps must be uniformly spaced and increasing")
            object.__setattr__(self, "timestamps", _readonly(ts.copy()))

    @classmethod
    def from_series_list(cls, edges, series, timestamps=None):
        """Build from a list of per-node sequences; ragged input raises."""
        lengths = {len(s) for s in series}
        if len(lengths) > 1:
            raise InvalidSeries(f"ragged series lengths {sorted(lengths)}")
        return cls(len(series), edges, np.array(series, dtype=np.float64).reshape(len(series), -1), timestamps)

    @property
    def n_steps(self) -> int:
        return self.series.shape[1]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, i):
        e = self.edges
        return np.sort(np.concatenate([e[e[:, 0] == i, 1], e[e[:, 1] == i, 0]]))

    def same_as(self, other) -> bool:
        """Exact structural and numeric equality."""
        if self.n_nodes != other.n_nodes or self.series.shape != other.series.shape:
            return False
        if not np.array_equal(self.edges, other.edges):
            return False
        if not np.array_equal(self.series, other.series):
            return False
        if (self.timestamps is None) != (other.timestamps is None):
            return False
        return self.timestamps is None or np.array_equal(self.timestamps, other.timestamps)


@dataclass(frozen=True, order=True)
class Window:
    """Half-open time-index interval ``[start, end)``."""

    start: int
    end: int
    partial: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise InvalidConfig(f"invalid window [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def __contains__(self, t):
        return self.start <= t < self.end

    def slice(self):
        return slice(self.start, self.end)


def slice_windows(n_steps, length=None, *, timestamps=None, monthly=False):
    """Cut ``[0, n_steps)`` into contiguous windows.

    Either fixed ``length`` windows (a shorter trailing window is kept and
    flagged partial) or, with ``monthly=True``, one window per calendar month
    of ``timestamps``. Month fragments at either end are flagged partial.
    """
    n_steps = int(n_steps)
    if n_steps < 1:
        raise InvalidConfig("n_steps must be positive")
    if monthly:
        if timestamps is None:
            raise MissingTimestamps("monthly windows need timestamps")
        return _monthly_windows(np.asarray(timestamps, dtype="datetime64[s]"), n_steps)
    if length is None or int(length) <= 0:
        raise InvalidConfig(f"window length must be >= 1, got {length}")
    length = int(length)
    return [
        Window(s, min(s + length, n_steps), partial=(s + length > n_steps))
        for s in range(0, n_steps, length)
    ]


def _monthly_windows(ts, n_steps):
    if len(ts) != n_steps:
        raise MissingTimestamps(f"expected {n_steps} timestamps, got {len(ts)}")
    months = ts.astype("datetime64[M]")
    cuts = np.flatnonzero(months[1:] != months[:-1]) + 1
    bounds = [0, *cuts.tolist(), n_steps]
    step = ts[1] - ts[0] if n_steps > 1 else np.timedelta64(1, "D")
    windows = []
    for s, e in zip(bounds[:-1], bounds[1:]):
        month = months[s]
        month_start = month.astype("datetime64[s]")
        month_end = (month + 1).astype("datetime64[s]")
        partial = bool(ts[s] - step >= month_start or ts[e - 1] + step < month_end)
        windows.append(Window(s, e, partial=partial))
    return windows


def induced_subgraph(g: TemporalGraph, keep):
    """Subgraph on ``keep``, re-indexed densely in increasing original id.

    Returns ``(subgraph, id_map)`` where ``id_map[new] == old``.
    """
    keep = np.unique(np.asarray(list(keep) if not isinstance(keep, np.ndarray) else keep, dtype=np.int64))
    if len(keep) and (keep[0] < 0 or keep[-1] >= g.n_nodes):
        bad = keep[0] if keep[0] < 0 else keep[-1]
        raise InvalidNode(f"node {bad} not in [0, {g.n_nodes})")
    new_of_old = np.full(g.n_nodes, -1, dtype=np.int64)
    new_of_old[keep] = np.arange(len(keep))
    e = new_of_old[g.edges] if g.n_edges else np.empty((0, 2), dtype=np.int64)
    e = e[(e >= 0).all(axis=1)]
    sub = TemporalGraph(len(keep), e, g.series[keep], g.timestamps)
    return sub, keep
