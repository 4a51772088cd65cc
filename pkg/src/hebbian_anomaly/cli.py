"""Command-line interface.

Exit codes: 0 success, 1 internal error, 2 input error, 3 config/shape error.
Set ``HEBBIAN_ANOMALY_LOG`` (e.g. ``INFO``, ``DEBUG``) for log output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path

import numpy as np

from . import io as hio
from .community import extract_clusters, louvain, network_stats
from .errors import AnomalyError, InvalidPattern, MissingInput
from .filter import ScoreConfig, burst_profile, filter_potential
from .learn import LearnConfig, learn_all_windows
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    run_pipeline,
    write_filter_outputs,
    write_pipeline_outputs,
)
from .recall import RecallConfig, build_initial_pattern, recall
from .synth import EventSpec, SynthConfig, generate

log = logging.getLogger("hebbian_anomaly")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _window_arg(s):
    if s == "monthly":
        return s
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'monthly'") from None
    if v < 1:
        raise argparse.ArgumentTypeError("window length must be >= 1")
    return v


def _add_dataset(p):
    g = p.add_argument_group("dataset")
    g.add_argument("--manifest", help="dataset manifest (JSON); overrides the flags below")
    g.add_argument("--edges", help="edge file: src<TAB>dst per line")
    g.add_argument("--series", help="series file (dense or long layout)")
    g.add_argument("--layout", choices=("dense", "long"), default="dense")
    g.add_argument("--labels", help="label file: node_id<TAB>name per line")
    g.add_argument("--n-steps", type=int, help="series length (long layout)")
    g.add_argument("--origin", help="ISO-8601 UTC instant of time step 0")
    g.add_argument("--step-seconds", type=int, help="time step length in seconds")


def _add_score(p):
    g = p.add_argument_group("stage 1")
    g.add_argument("--score", choices=("zscore", "identity"), default="zscore")
    g.add_argument("--c0", type=float, default=3.0)
    g.add_argument("--min-bursts", type=int, default=2)


def _add_learn(p):
    g = p.add_argument_group("stage 2")
    g.add_argument("--window", type=_window_arg, default="monthly", help="window length in steps, or 'monthly'")
    g.add_argument("--lambda", dest="lam", type=float, default=0.5)
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--similarity", choices=("ratio", "product", "gaussian"), default="ratio")
    g.add_argument("--prune-below", type=float, default=0.0)


def _add_community(p):
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--min-cluster-size", type=int, default=2)


def _add_recall(p):
    g = p.add_argument_group("recall")
    g.add_argument("--theta", type=float, default=0.0)
    g.add_argument("--epsilon", type=float, default=1.0)
    g.add_argument("--max-iters", type=int, default=100)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)


def _load(args):
    if args.manifest:
        m = hio.DatasetManifest.load(args.manifest)
    else:
        if not args.edges or not args.series:
            raise MissingInput("need --manifest or both --edges and --series")
        m = hio.DatasetManifest(args.edges, args.series, args.layout, args.labels,
                                n_steps=args.n_steps, origin=args.origin, step_seconds=args.step_seconds)
    ds = hio.load_dataset(m)
    if ds.self_loops:
        log.warning("dropped %d self-loop(s)", ds.self_loops)
    return ds


def _pipeline_config(args):
    return PipelineConfig(
        score=ScoreConfig(args.score, args.c0, args.min_bursts),
        learn=LearnConfig(args.lam, args.alpha, args.similarity, args.prune_below),
        recall=RecallConfig(*(getattr(args, k, d) for k, d in (("theta", 0.0), ("epsilon", 1.0), ("max_iters", 100)))),
        window=args.window,
        resolution=getattr(args, "resolution", 1.0),
        seed=args.seed,
        min_cluster_size=getattr(args, "min_cluster_size", 2),
        jobs=max(1, args.jobs),
    )


def cmd_filter(args):
    ds = _load(args)
    reduced, id_map, profile = filter_potential(ds.graph, ScoreConfig(args.score, args.c0, args.min_bursts))
    res = PipelineResult(ds.graph, reduced, id_map, profile, [])
    write_filter_outputs(res, args.out, ds.labels)
    print(f"kept {reduced.n_nodes}/{ds.graph.n_nodes} nodes, {reduced.n_edges}/{ds.graph.n_edges} edges")
    return 0


def cmd_learn(args):
    ds = _load(args)
    cfg = _pipeline_config(args)
    windows = cfg.windows_for(ds.graph)
    reduced, id_map, profile = filter_potential(ds.graph, cfg.score)
    out = Path(args.out)
    write_filter_outputs(PipelineResult(ds.graph, reduced, id_map, profile, windows), out / "filtered", ds.labels)
    rows = []
    for k, net in enumerate(learn_all_windows(reduced, profile, cfg.learn, windows, cfg.jobs)):
        path = out / "networks" / f"w{k:03d}.tsv"
        hio.export_weighted_edges(net, path)
        rows.append((k, net.window.start, net.window.end, int(net.window.partial), net.n_edges, path.name))
    hio.write_table(out / "networks" / "index.tsv", ("window_id", "start", "end", "partial", "n_edges", "file"), rows)
    print(f"learned {len(rows)} network(s) over {reduced.n_nodes} nodes")
    return 0


def cmd_communities(args):
    labels = hio.read_labels(args.labels) if args.labels else None
    id_map = _read_id_map(args.id_map)
    out = Path(args.out)
    summary = []
    for k, path in enumerate(args.network):
        net = hio.read_weighted_edges(path)
        part = louvain(net, args.resolution, args.seed) if net.n_edges else None
        stats = network_stats(net, part)
        stats["network"] = str(path)
        if part is not None:
            stats["assignment"] = part.assignment.tolist()
        stem = Path(path).stem
        (out).mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.communities.json").write_text(json.dumps(stats, indent=1) + "\n")
        hio.export_gexf(net, part, labels, out / f"{stem}.gexf", id_map=id_map)
        summary.append(f"{path}: {net.n_edges} edges, "
                       + (f"{part.n_communities} communities, Q={part.modularity:.4f}" if part else "no edges"))
    print("\n".join(summary))
    return 0


def _read_id_map(path):
    if not path:
        return None
    pairs = [tuple(int(x) for x in s.split()[:2]) for _, s in hio._data_lines(path)]
    m = np.zeros(len(pairs), dtype=np.int64)
    for new, old in pairs:
        m[new] = old
    return m


def cmd_report(args):
    ds = _load(args)
    id_map = _read_id_map(args.id_map)
    labels = ds.labels
    if id_map is not None and labels:
        labels = {int(id_map[k]): v for k, v in labels.items() if k < len(id_map)}
    reports = []
    for k, path in enumerate(args.network):
        net = hio.read_weighted_edges(path)
        if net.n_nodes != ds.graph.n_nodes:
            raise InvalidPattern(f"{path}: network has {net.n_nodes} nodes, dataset has {ds.graph.n_nodes}")
        _, reps = extract_clusters(net, ds.graph, id_map, labels or None, window_id=k,
                                   resolution=args.resolution, seed=args.seed, min_size=args.min_cluster_size)
        reports.extend(reps)
    hio.export_report(reports, args.out)
    print(f"{len(reports)} cluster record(s) -> {args.out}")
    return 0


def _read_seeds(path):
    return [hio._int(s.split()[0], path, lineno) for lineno, s in hio._data_lines(path)]


def cmd_recall(args):
    ds = _load(args)
    net = hio.read_weighted_edges(args.network)
    g = ds.graph
    if net.n_nodes != g.n_nodes or net.window.end > g.n_steps:
        raise InvalidPattern(f"network ({net.n_nodes} nodes, window ends at {net.window.end}) "
                             f"does not match dataset ({g.n_nodes} nodes, {g.n_steps} steps)")
    w = net.window
    profile = burst_profile(g.series, ScoreConfig(args.score, args.c0, args.min_bursts))
    seeds = _read_seeds(args.seeds)
    p0 = build_initial_pattern(g.n_nodes, w, {s: profile.mask[s, w.slice()] for s in seeds})
    res = recall(net, p0, RecallConfig(args.theta, args.epsilon, args.max_iters))
    on = np.argwhere(res.pattern == 1)
    lines = [f"# node\tt\twindow={w.start},{w.end}\titerations={res.iterations}\tstatus={res.status}"]
    lines += [f"{i}\t{w.start + t}" for i, t in on.tolist()]
    hio._write_text(args.out, "\n".join(lines) + "\n")
    print(f"status={res.status} iterations={res.iterations} active_entries={len(on)}")
    return 0


def cmd_synth(args):
    ev = EventSpec(args.cluster_size, args.event_start, args.event_start + args.event_length,
                   args.amplitude, args.lag)
    cfg = SynthConfig(args.nodes, args.steps, args.rate, (ev,), args.mean_degree, args.intra_density,
                      seed=args.seed)
    g, truth = generate(cfg)
    out = Path(args.out)
    hio.write_dataset(g, out, layout=args.layout)
    hio.write_ground_truth(truth, out / "ground_truth.tsv")
    print(f"wrote {g.n_nodes} nodes, {g.n_edges} edges, {g.n_steps} steps to {out}")
    return 0


def cmd_pipeline(args):
    ds = _load(args)
    cfg = _pipeline_config(args)
    res = run_pipeline(ds.graph, cfg, ds.labels or None)
    index = write_pipeline_outputs(res, cfg, args.out, ds.labels or None)
    print(f"kept {index['n_kept']}/{index['n_nodes']} nodes; {len(index['windows'])} window(s); "
          f"{len(res.reports)} cluster record(s)")
    return 0


def cmd_ingest_email(args):
    if args.csv:
        records = hio.iter_enron_csv(args.csv)
    else:
        records = hio.iter_maildir(args.maildir)
    ing = hio.ingest_email_log(records, date.fromisoformat(args.start), date.fromisoformat(args.end), args.min_sent)
    ing.write(args.out)
    print(f"{ing.graph.n_nodes} nodes, {ing.graph.n_edges} edges, {ing.graph.n_steps} days; "
          + ", ".join(f"{k}={v}" for k, v in sorted(ing.counters.items())))
    return 0


def build_parser():
    p = _Parser(prog="hebbian-anomaly", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("filter", help="drop nodes without enough bursts")
    _add_dataset(s); _add_score(s); _add_common(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("learn", help="learn one memory network per window")
    _add_dataset(s); _add_score(s); _add_learn(s); _add_common(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("communities", help="Louvain partitions, stats and GEXF for network files")
    s.add_argument("network", nargs="+")
    s.add_argument("--labels")
    s.add_argument("--id-map", help="new_id<TAB>original_id table (labels are keyed by original id)")
    _add_community(s); _add_common(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_communities)

    s = sub.add_parser("report", help="cluster reports for network files over their dataset")
    s.add_argument("network", nargs="+")
    _add_dataset(s); _add_community(s); _add_common(s)
    s.add_argument("--id-map")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("recall", help="complete a partial pattern with a learned network")
    _add_dataset(s); _add_score(s); _add_recall(s); _add_common(s)
    s.add_argument("--network", required=True)
    s.add_argument("--seeds", required=True, help="one node id per line")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_recall)

    s = sub.add_parser("synth", help="generate a graph with one planted event")
    s.add_argument("--nodes", type=int, default=1000)
    s.add_argument("--steps", type=int, default=720)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--cluster-size", type=int, default=20)
    s.add_argument("--event-start", type=int, default=348)
    s.add_argument("--event-length", type=int, default=24)
    s.add_argument("--amplitude", type=float, default=10.0)
    s.add_argument("--lag", type=int, default=0)
    s.add_argument("--mean-degree", type=float, default=6.0)
    s.add_argument("--intra-density", type=float, default=0.3)
    s.add_argument("--layout", choices=("dense", "long"), default="dense")
    _add_common(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("pipeline", help="filter, learn, communities and reports in one go")
    _add_dataset(s); _add_score(s); _add_learn(s); _add_community(s); _add_recall(s); _add_common(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("ingest-email", help="build a daily email-activity dataset")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="CSV with 'file' and 'message' columns")
    src.add_argument("--maildir", help="maildir tree, one message per file")
    s.add_argument("--start", default="1999-01-01")
    s.add_argument("--end", default="2002-07-31")
    s.add_argument("--min-sent", type=int, default=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest_email)
    return p


def main(argv=None):
    level = os.environ.get("HEBBIAN_ANOMALY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AnomalyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
