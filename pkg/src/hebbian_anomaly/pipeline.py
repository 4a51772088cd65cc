"""End-to-end pipeline: filter, learn one network per window, extract clusters."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .community import DEFAULT_SEED, extract_clusters, network_stats
from .core import TemporalGraph, slice_windows
from .errors import AnomalyError, InvalidConfig
from .filter import ScoreConfig, filter_potential
from .io import export_gexf, export_report, export_weighted_edges, write_dataset, write_table
from .learn import LearnConfig, activity_matrix, learn_window
from .recall import RecallConfig


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline knobs; the defaults are the email-network settings."""

    score: ScoreConfig = ScoreConfig()
    learn: LearnConfig = LearnConfig()
    recall: RecallConfig = RecallConfig()
    window: int | str = "monthly"
    resolution: float = 1.0
    seed: int = DEFAULT_SEED
    min_cluster_size: int = 2
    jobs: int = 1

    def __post_init__(self):
        if self.window != "monthly" and (not isinstance(self.window, int) or self.window < 1):
            raise InvalidConfig(f"window must be a positive length or 'monthly', got {self.window!r}")
        if self.resolution <= 0:
            raise InvalidConfig("resolution must be > 0")
        if self.min_cluster_size < 1:
            raise InvalidConfig("min_cluster_size must be >= 1")

    def windows_for(self, g: TemporalGraph):
        if self.window == "monthly":
            return slice_windows(g.n_steps, timestamps=g.timestamps, monthly=True)
        return slice_windows(g.n_steps, self.window)

    def as_dict(self):
        return asdict(self)


@dataclass
class WindowResult:
    window_id: int
    network: object
    partition: object
    reports: list
    stats: dict


@dataclass
class PipelineResult:
    graph: TemporalGraph
    reduced: TemporalGraph
    id_map: np.ndarray
    profile: object
    windows: list
    results: list = field(default_factory=list)

    @property
    def networks(self):
        return [r.network for r in self.results]

    @property
    def reports(self):
        return [rep for r in self.results for rep in r.reports]


class WindowFailed(AnomalyError):
    kind = "window-failed"

    def __init__(self, window_id, cause):
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"window {window_id}: {cause}")


def process_window(k, w, reduced, acts, id_map, labels, cfg: PipelineConfig):
    try:
        net = learn_window(reduced, acts, cfg.learn, w)
        part, reports = extract_clusters(net, reduced, id_map, labels, window_id=k,
                                         resolution=cfg.resolution, seed=cfg.seed,
                                         min_size=cfg.min_cluster_size)
        stats = network_stats(net, part)
    except AnomalyError as exc:
        raise WindowFailed(k, exc) from exc
    stats.update(window_id=k, start=w.start, end=w.end, partial=w.partial)
    return WindowResult(k, net, part, reports, stats)


def run_pipeline(g: TemporalGraph, cfg: PipelineConfig = PipelineConfig(), labels=None) -> PipelineResult:
    windows = cfg.windows_for(g)
    reduced, id_map, profile = filter_potential(g, cfg.score)
    acts = activity_matrix(reduced, profile)
    res = PipelineResult(g, reduced, id_map, profile, windows)

    def job(item):
        k, w = item
        return process_window(k, w, reduced, acts, id_map, labels, cfg)

    items = list(enumerate(windows))
    if cfg.jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            res.results = list(pool.map(job, items))
    else:
        res.results = [job(it) for it in items]
    return res


def write_filter_outputs(res: PipelineResult, out_dir, labels=None):
    """Reduced dataset (re-indexed), its id map and the per-node burst counts."""
    out_dir = Path(out_dir)
    sub_labels = None
    if labels:
        sub_labels = {i: labels[int(o)] for i, o in enumerate(res.id_map) if int(o) in labels}
    write_dataset(res.reduced, out_dir, sub_labels)
    write_table(out_dir / "idmap.tsv", ("new_id", "original_id"), enumerate(res.id_map.tolist()))
    write_table(out_dir / "burstiness.tsv", ("new_id", "original_id", "burstiness"),
                zip(range(len(res.id_map)), res.id_map.tolist(), res.profile.burstiness.tolist()))


def write_pipeline_outputs(res: PipelineResult, cfg: PipelineConfig, out_dir, labels=None):
    out_dir = Path(out_dir)
    write_filter_outputs(res, out_dir / "filtered", labels)
    index = {
        "n_nodes": res.graph.n_nodes,
        "n_kept": res.reduced.n_nodes,
        "n_edges_kept": res.reduced.n_edges,
        "config": cfg.as_dict(),
        "windows": [],
    }
    for r in res.results:
        wdir = out_dir / "windows" / f"w{r.window_id:03d}"
        export_weighted_edges(r.network, wdir / "network.tsv")
        (wdir / "stats.json").write_text(json.dumps(r.stats, indent=1) + "\n")
        export_gexf(r.network, r.partition, labels, wdir / "graph.gexf", id_map=res.id_map)
        index["windows"].append({
            "window_id": r.window_id,
            "start": r.network.window.start,
            "end": r.network.window.end,
            "partial": r.network.window.partial,
            "n_edges": r.network.n_edges,
            "n_clusters": len(r.reports),
            "dir": str(wdir.relative_to(out_dir)),
        })
    export_report(res.reports, out_dir / "reports.json")
    (out_dir / "index.json").write_text(json.dumps(index, indent=1) + "\n")
    return index
