"""Reading datasets, ingesting email logs, and writing networks and reports.

File formats
------------
edges      ``src<TAB>dst`` per line (any whitespace accepted), ``#`` comments.
dense      ``node_id,v0,v1,...,v(T-1)`` per line.
long       ``node_id,t,value`` per line; absent ``(node, t)`` pairs are 0.
labels     ``node_id<TAB>label`` per line.
network    ``src<TAB>dst<TAB>weight`` per surviving edge, after a header comment
           recording the window and node count.
manifest   JSON, paths relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import email
import email.utils
import json
import logging
import os
import sys
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from .core import TemporalGraph, Window, canonical_edges
from .errors import InvalidSeries, MissingInput, ParseError, UnknownNode, WriteError
from .learn import MemoryNetwork

log = logging.getLogger(__name__)


@dataclass
class DatasetManifest:
    edges: str
    series: str
    layout: str = "dense"
    labels: str | None = None
    n_nodes: int | None = None
    n_steps: int | None = None
    origin: str | None = None  # ISO-8601 instant of time step 0 (UTC)
    step_seconds: int | None = None
    base_dir: str = field(default=".", repr=False)

    def path(self, name):
        p = getattr(self, name)
        return None if p is None else Path(self.base_dir) / p

    def timestamps(self, n_steps):
        if self.origin is None or self.step_seconds is None:
            return None
        t0 = np.datetime64(self.origin.replace("Z", ""), "s")
        return t0 + np.arange(n_steps) * np.timedelta64(int(self.step_seconds), "s")

    def save(self, path):
        path = Path(path)
        data = asdict(self)
        data.pop("base_dir")
        _write_text(path, json.dumps(data, indent=2) + "\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise MissingInput(f"no such file: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), path, exc.lineno) from None
        return cls(**data, base_dir=str(path.parent))


@dataclass
class Dataset:
    graph: TemporalGraph
    labels: dict
    self_loops: int = 0
    duplicates: int = 0


def _open(path):
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"no such file: {path}")
    return open(path, encoding="utf-8")


def _data_lines(path):
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s and not s.startswith("#"):
                yield lineno, s


def _write_text(path, text):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def _int(tok, path, lineno, what="node id"):
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"bad {what} {tok!r}", path, lineno) from None
    if v < 0:
        raise ParseError(f"negative {what} {v}", path, lineno)
    return v


def _float(tok, path, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"bad value {tok!r}", path, lineno) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}", path, lineno)
    return v


def read_edges(path):
    """Return ``(edges, self_loops, duplicates)``; edges canonical and unique."""
    pairs = []
    loops = 0
    for lineno, s in _data_lines(path):
        parts = s.split()
        if len(parts) < 2:
            raise ParseError("expected two node ids", path, lineno)
        a, b = _int(parts[0], path, lineno), _int(parts[1], path, lineno)
        if a == b:
            loops += 1
            continue
        pairs.append((a, b))
    edges, dropped = canonical_edges(pairs, strict=False)
    if loops:
        log.warning("%s: dropped %d self-loop(s)", path, loops)
    return edges, loops, dropped


def read_dense_series(path):
    """``{node: values}`` from the dense layout; ragged rows raise."""
    rows = {}
    length = None
    for lineno, s in _data_lines(path):
        parts = s.split(",")
        node = _int(parts[0], path, lineno)
        vals = [_float(v, path, lineno) for v in parts[1:]]
        if length is None:
            length = len(vals)
        elif len(vals) != length:
            raise InvalidSeries(f"{path}:{lineno}: row has {len(vals)} values, expected {length}")
        if node in rows:
            raise ParseError(f"duplicate row for node {node}", path, lineno)
        rows[node] = vals
    return rows, length or 0


def read_long_series(path):
    """``[(node, t, value)]`` records from the long layout."""
    recs = []
    for lineno, s in _data_lines(path):
        parts = s.split(",")
        if len(parts) != 3:
            raise ParseError("expected node_id,t,value", path, lineno)
        recs.append((_int(parts[0], path, lineno), _int(parts[1], path, lineno, "time index"),
                     _float(parts[2], path, lineno), lineno))
    return recs


def read_labels(path):
    labels = {}
    for lineno, s in _data_lines(path):
        parts = s.split("\t", 1) if "\t" in s else s.split(None, 1)
        labels[_int(parts[0], path, lineno)] = parts[1] if len(parts) > 1 else ""
    return labels


def load_dataset(manifest: DatasetManifest) -> Dataset:
    edges, loops, dups = read_edges(manifest.path("edges"))
    labels = read_labels(manifest.path("labels")) if manifest.labels else {}
    series_path = manifest.path("series")
    declared_n = manifest.n_nodes

    if manifest.layout == "dense":
        rows, T = read_dense_series(series_path)
        ids = list(rows)
    elif manifest.layout == "long":
        recs = read_long_series(series_path)
        ids = [r[0] for r in recs]
        T = manifest.n_steps if manifest.n_steps is not None else (max((r[1] for r in recs), default=-1) + 1)
        for node, t, _, lineno in recs:
            if t >= T:
                raise ParseError(f"time index {t} outside [0, {T})", series_path, lineno)
    else:
        raise ParseError(f"unknown series layout {manifest.layout!r}")
    if manifest.n_steps is not None and T != manifest.n_steps:
        raise InvalidSeries(f"{series_path}: series length {T} != declared {manifest.n_steps}")

    if declared_n is None:
        n = 1 + max([-1, *ids, *labels, int(edges.max()) if len(edges) else -1])
    else:
        n = declared_n
        bad = [i for i in ids if i >= n]
        if bad:
            raise UnknownNode(f"{series_path}: node {bad[0]} not in [0, {n})")
    if len(edges) and edges.max() >= n:
        raise UnknownNode(f"{manifest.path('edges')}: node {int(edges.max())} not in [0, {n})")

    series = np.zeros((n, T))
    if manifest.layout == "dense":
        for node, vals in rows.items():
            series[node] = vals
    else:
        for node, t, v, _ in recs:
            series[node, t] += v
    g = TemporalGraph(n, edges, series, manifest.timestamps(T))
    return Dataset(g, labels, loops, dups)


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def write_dataset(g: TemporalGraph, out_dir, labels=None, layout="dense", *, origin=None, step_seconds=None):
    """Write ``g`` as edges/series(/labels) plus ``manifest.json``; returns the manifest."""
    out_dir = Path(out_dir)
    edge_lines = ["# src\tdst"] + [f"{a}\t{b}" for a, b in g.edges.tolist()]
    _write_text(out_dir / "edges.tsv", "\n".join(edge_lines) + "\n")
    if layout == "dense":
        lines = [f"{i}," + ",".join(_fmt(v) for v in row) for i, row in enumerate(g.series.tolist())]
        name = "series.csv"
    elif layout == "long":
        nz = np.argwhere(g.series != 0)
        lines = [f"{i},{t},{_fmt(g.series[i, t])}" for i, t in nz.tolist()]
        name = "series_long.csv"
    else:
        raise ValueError(f"unknown layout {layout!r}")
    _write_text(out_dir / name, "\n".join(lines) + ("\n" if lines else ""))
    label_name = None
    if labels:
        label_name = "labels.tsv"
        _write_text(out_dir / label_name, "".join(f"{k}\t{labels[k]}\n" for k in sorted(labels)))
    if origin is None and g.timestamps is not None:
        origin = str(g.timestamps[0])
        step_seconds = int((g.timestamps[1] - g.timestamps[0]) / np.timedelta64(1, "s"))
    m = DatasetManifest("edges.tsv", name, layout, label_name, g.n_nodes, g.n_steps,
                        origin, step_seconds, base_dir=str(out_dir))
    m.save(out_dir / "manifest.json")
    return m


def write_table(path, header, rows):
    lines = ["# " + "\t".join(header)] + ["\t".join(str(x) for x in r) for r in rows]
    _write_text(path, "\n".join(lines) + "\n")


# -- learned networks -------------------------------------------------------

def export_weighted_edges(w: MemoryNetwork, path):
    header = f"# window\t{w.window.start}\t{w.window.end}\tpartial={int(w.window.partial)}\tn_nodes={w.n_nodes}"
    lines = [header] + [f"{a}\t{b}\t{x:.6g}" for (a, b), x in zip(w.edges.tolist(), w.weights.tolist())]
    _write_text(path, "\n".join(lines) + "\n")


def read_weighted_edges(path) -> MemoryNetwork:
    window = None
    n_nodes = None
    edges, weights = [], []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("# window"):
                parts = s[1:].split()
                try:
                    window = Window(int(parts[1]), int(parts[2]), partial=parts[3] == "partial=1")
                    n_nodes = int(parts[4].split("=")[1])
                except (IndexError, ValueError):
                    raise ParseError("malformed window header", path, lineno) from None
                continue
            if s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3:
                raise ParseError("expected src, dst, weight", path, lineno)
            a, b = _int(parts[0], path, lineno), _int(parts[1], path, lineno)
            edges.append((min(a, b), max(a, b)))
            weights.append(_float(parts[2], path, lineno))
    if window is None:
        raise ParseError("missing '# window' header", path)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((e[:, 1], e[:, 0])) if len(e) else np.arange(0)
    return MemoryNetwork(window, n_nodes, e[order], np.asarray(weights, dtype=np.float64)[order])


def export_gexf(w: MemoryNetwork, partition, labels, path, id_map=None):
    """GEXF 1.2 file with a ``community`` node attribute and weighted edges.

    ``labels`` is keyed by original id; ``id_map`` maps network node to
    original id (identity when omitted).
    """
    import networkx as nx

    g = nx.Graph()
    for i in range(w.n_nodes):
        orig = int(id_map[i]) if id_map is not None else i
        label = (labels or {}).get(orig, str(orig))
        comm = int(partition.assignment[i]) if partition is not None else -1
        g.add_node(i, label=label, community=comm, original_id=orig)
    for (a, b), x in zip(w.edges.tolist(), w.weights.tolist()):
        g.add_edge(a, b, weight=float(x))
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        nx.write_gexf(g, path, version="1.2draft")
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


# -- reports --------------------------------------------------------------

REPORT_FIELDS = ("window_id", "window_start", "window_end", "partial", "cluster_id", "kind",
                 "size", "modularity", "peak_time", "nodes", "labels", "activity", "raw_activity")


def report_record(r):
    return {
        "window_id": r.window_id,
        "window_start": r.window.start,
        "window_end": r.window.end,
        "partial": r.window.partial,
        "cluster_id": r.cluster_id,
        "kind": r.kind,
        "size": r.size,
        "modularity": r.modularity,
        "peak_time": r.peak_time,
        "nodes": list(r.nodes),
        "labels": None if r.labels is None else list(r.labels),
        "activity": [float(x) for x in r.total_activity],
        "raw_activity": [float(x) for x in r.raw_activity],
    }


def export_report(reports, path, extra=None):
    doc = {"records": [report_record(r) for r in reports]}
    if extra:
        doc.update(extra)
    _write_text(path, json.dumps(doc, indent=1) + "\n")


def read_report(path):
    with _open(path) as fh:
        return json.load(fh)


def write_ground_truth(ground, path):
    lines = [f"{k}\t{ev.interval.start}\t{ev.interval.end}\t" + ",".join(str(v) for v in ev.nodes)
             for k, ev in enumerate(ground.events)]
    _write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_ground_truth(path):
    from .synth import GroundTruth, PlantedEvent

    events = []
    for lineno, s in _data_lines(path):
        parts = s.split("\t")
        if len(parts) != 4:
            raise ParseError("expected event_id, start, end, nodes", path, lineno)
        nodes = tuple(_int(x, path, lineno) for x in parts[3].split(",") if x)
        events.append(PlantedEvent(nodes, Window(int(parts[1]), int(parts[2]))))
    return GroundTruth(tuple(events))


# -- email logs -------------------------------------------------------------

@dataclass
class EmailIngest:
    graph: TemporalGraph
    addresses: list
    start: date
    counters: Counter

    @property
    def labels(self):
        return dict(enumerate(self.addresses))

    def write(self, out_dir):
        return write_dataset(self.graph, out_dir, self.labels, layout="long")


def _utc_date(ts):
    if isinstance(ts, datetime):
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        return ts.astimezone(timezone.utc).date()
    if isinstance(ts, date):
        return ts
    return datetime.fromtimestamp(float(ts), tz=timezone.utc).date()


def ingest_email_log(records, start=date(1999, 1, 1), end=date(2002, 7, 31), min_sent=3):
    """Build the daily email-activity graph from ``(sender, recipients, timestamp)`` records.

    An edge joins two addresses that exchanged at least one email in range;
    ``x[i, t]`` counts emails sent by address ``i`` on UTC day ``t`` (one per
    email, whatever the number of recipients). Addresses that sent fewer
    than ``min_sent`` emails in range are dropped, with their edges.
    """
    counters = Counter()
    daily = defaultdict(Counter)
    sent = Counter()
    pairs = set()
    n_days = (end - start).days + 1
    for rec in records:
        try:
            sender, recipients, ts = rec
            day = _utc_date(ts)
            sender = sender.strip().lower()
            if not sender:
                raise ValueError("empty sender")
        except Exception:
            counters["malformed"] += 1
            continue
        if not start <= day <= end:
            counters["out_of_range"] += 1
            continue
        counters["emails"] += 1
        t = (day - start).days
        daily[sender][t] += 1
        sent[sender] += 1
        for r in recipients:
            r = r.strip().lower()
            if r and r != sender:
                pairs.add((sender, r) if sender < r else (r, sender))

    addresses = sorted(a for a, c in sent.items() if c >= min_sent)
    index = {a: i for i, a in enumerate(addresses)}
    edges = [(index[a], index[b]) for a, b in pairs if a in index and b in index]
    series = np.zeros((len(addresses), n_days))
    for a, i in index.items():
        for t, c in daily[a].items():
            series[i, t] = c
    counters["dropped_low_senders"] = len(sent) - len(addresses)
    origin = np.datetime64(start.isoformat(), "s")
    ts = origin + np.arange(n_days) * np.timedelta64(86400, "s")
    g = TemporalGraph(len(addresses), canonical_edges(edges, strict=False)[0], series, ts)
    return EmailIngest(g, addresses, start, counters)


def parse_email_message(text):
    """``(sender, recipients, datetime)`` from raw RFC 822 text, or None."""
    msg = email.message_from_string(text)
    date_hdr = msg.get("Date")
    sender = email.utils.parseaddr(msg.get("From", ""))[1].lower()
    if not date_hdr or not sender:
        return None
    try:
        when = email.utils.parsedate_to_datetime(date_hdr)
    except (TypeError, ValueError, IndexError):
        return None
    if when is None:
        return None
    fields = [msg.get(h, "") for h in ("To", "Cc", "Bcc")]
    recipients = sorted({a.lower() for _, a in email.utils.getaddresses([f for f in fields if f]) if a})
    return sender, recipients, when, msg.get("Subject", "")


def _dedup(parsed):
    seen = set()
    for p in parsed:
        if p is None:
            yield None
            continue
        sender, recipients, when, subject = p
        key = (sender, when, tuple(recipients), subject)
        if key in seen:
            continue
        seen.add(key)
        yield sender, recipients, when


def iter_enron_csv(path, dedup=True):
    """Records from the ``file,message`` CSV distribution of the corpus."""
    csv.field_size_limit(sys.maxsize)
    with _open(path) as fh:
        parsed = (parse_email_message(row["message"]) for row in csv.DictReader(fh))
        yield from (_dedup(parsed) if dedup else ((p[:3] if p else None) for p in parsed))


def iter_maildir(root, dedup=True):
    """Records from a maildir tree (one message per file)."""
    root = Path(root)
    if not root.exists():
        raise MissingInput(f"no such directory: {root}")

    def parsed():
        for dirpath, _, files in sorted(os.walk(root)):
            for name in sorted(files):
                try:
                    text = Path(dirpath, name).read_text(encoding="utf-8", errors="replace")
                except OSError:
                    yield None
                    continue
                yield parse_email_message(text)

    yield from (_dedup(parsed()) if dedup else ((p[:3] if p else None) for p in parsed()))
