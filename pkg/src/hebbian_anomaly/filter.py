"""Per-node burst scoring and removal of nodes without potential anomalies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TemporalGraph, induced_subgraph
from .errors import InvalidConfig, InvalidSeries


def zscore_rows(x):
    """Row-wise z-score with population std. Rows with zero spread score 0."""
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=1)
    std = x.std(axis=1)
    constant = (np.ptp(x, axis=1) == 0) | (std == 0)
    std = np.where(constant, 0.0, std)
    safe = np.where(constant, 1.0, std)
    scores = (x - mean[:, None]) / safe[:, None]
    scores[constant] = 0.0
    return scores, mean, std


def identity_rows(x):
    x = np.asarray(x, dtype=np.float64)
    return x.copy(), x.mean(axis=1), x.std(axis=1)


# Extension point: name -> f(rows) returning (scores, means, stds).
SCORE_FUNCTIONS = {
    "zscore": zscore_rows,
    "identity": identity_rows,
}


@dataclass(frozen=True)
class ScoreConfig:
    """Stage-1 parameters. Defaults are the email-network settings."""

    score_kind: str = "zscore"
    c0: float = 3.0
    b_min: int = 2

    def __post_init__(self):
        if self.score_kind not in SCORE_FUNCTIONS:
            raise InvalidConfig(f"unknown score kind {self.score_kind!r}")
        if not self.c0 >= 0:
            raise InvalidConfig("c0 must be >= 0")
        if self.b_min < 0:
            raise InvalidConfig("b_min must be >= 0")


WIKIPEDIA_SCORE = ScoreConfig("zscore", c0=5.0, b_min=5)
ENRON_SCORE = ScoreConfig("zscore", c0=3.0, b_min=2)


@dataclass(frozen=True)
class NodeStats:
    mean: float
    stddev: float


@dataclass(frozen=True, eq=False)
class BurstProfile:
    """Scores, burst masks and burst counts for a set of nodes (rows)."""

    scores: np.ndarray
    mask: np.ndarray
    burstiness: np.ndarray

    def __len__(self):
        return len(self.burstiness)

    def take(self, rows):
        return BurstProfile(self.scores[rows], self.mask[rows], self.burstiness[rows])


def node_scores(x, cfg: ScoreConfig = ScoreConfig()):
    """Score one series; returns ``(scores, NodeStats)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) < 2:
        raise InvalidSeries("series must be one-dimensional with length >= 2")
    scores, mean, std = SCORE_FUNCTIONS[cfg.score_kind](x[None, :])
    return scores[0], NodeStats(float(mean[0]), float(std[0]))


def burst_mask(scores, c0):
    """1 where ``|score| > c0`` (strict), else 0."""
    return (np.abs(np.asarray(scores, dtype=np.float64)) > c0).astype(np.uint8)


def burstiness(mask):
    return int(np.asarray(mask, dtype=np.int64).sum())


def burst_profile(series, cfg: ScoreConfig = ScoreConfig()) -> BurstProfile:
    """Score every row of an ``(N, T)`` array at once."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2 or series.shape[1] < 2:
        raise InvalidSeries("series must be (N, T) with T >= 2")
    scores, _, _ = SCORE_FUNCTIONS[cfg.score_kind](series)
    mask = burst_mask(scores, cfg.c0)
    return BurstProfile(scores, mask, mask.sum(axis=1, dtype=np.int64))


def filter_potential(g: TemporalGraph, cfg: ScoreConfig = ScoreConfig()):
    """Keep nodes with at least ``cfg.b_min`` bursts.

    Returns ``(reduced_graph, id_map, profile)``; ``id_map[new] == old`` and
    ``profile`` rows follow the reduced graph's node order.
    """
    profile = burst_profile(g.series, cfg)
    keep = np.flatnonzero(profile.burstiness >= cfg.b_min)
    reduced, id_map = induced_subgraph(g, keep)
    return reduced, id_map, profile.take(keep)
