import csv
import json
import xml.etree.ElementTree as ET
from datetime import date, datetime, timezone

import networkx as nx
import numpy as np
import pytest

from hebbian_anomaly import io as hio
from hebbian_anomaly.community import ClusterReport, louvain
from hebbian_anomaly.core import Window
from hebbian_anomaly.errors import InvalidSeries, MissingInput, ParseError, UnknownNode
from hebbian_anomaly.synth import EventSpec, SynthConfig, generate

from helpers import make_network

GEXF = "{http://www.gexf.net/1.2draft}"


def write(path, text):
    path.write_text(text)
    return path


def manifest(tmp_path, edges, series, layout="dense", **kw):
    write(tmp_path / "e.tsv", edges)
    write(tmp_path / "s.csv", series)
    return hio.DatasetManifest("e.tsv", "s.csv", layout, base_dir=str(tmp_path), **kw)


def test_edges_deduplicated(tmp_path):
    ds = hio.load_dataset(manifest(tmp_path, "0 1\n1 0\n", "0,1,2\n1,3,4\n"))
    assert ds.graph.edges.tolist() == [[0, 1]]
    assert ds.duplicates == 1


def test_long_layout_zero_fills(tmp_path):
    ds = hio.load_dataset(manifest(tmp_path, "", "0,3,7\n", "long", n_steps=5))
    assert ds.graph.series.tolist() == [[0, 0, 0, 7, 0]]


def test_self_loop_dropped_and_counted(tmp_path):
    ds = hio.load_dataset(manifest(tmp_path, "# comment\n0\t1\n2\t2\n", "0,1,2\n1,1,1\n2,0,0\n"))
    assert ds.self_loops == 1
    assert ds.graph.edges.tolist() == [[0, 1]]


def test_unknown_node(tmp_path):
    with pytest.raises(UnknownNode):
        hio.load_dataset(manifest(tmp_path, "0 1\n", "0,1,2\n5,1,1\n", n_nodes=2))


def test_ragged_dense_rows(tmp_path):
    with pytest.raises(InvalidSeries):
        hio.load_dataset(manifest(tmp_path, "0 1\n", "0,1,2\n1,1\n"))


@pytest.mark.parametrize("edges,series,line", [("0 1\nx 2\n", "0,1,2\n", 2), ("0 1\n", "0,1,2\n1,1,zz\n", 2),
                                               ("0\n", "0,1,2\n", 1)])
def test_parse_errors_carry_line_numbers(tmp_path, edges, series, line):
    with pytest.raises(ParseError) as exc:
        hio.load_dataset(manifest(tmp_path, edges, series))
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


def test_missing_file_names_path(tmp_path):
    m = hio.DatasetManifest("nope.tsv", "s.csv", base_dir=str(tmp_path))
    with pytest.raises(MissingInput, match="nope.tsv"):
        hio.load_dataset(m)


@pytest.mark.parametrize("layout", ["dense", "long"])
def test_synthetic_round_trip(tmp_path, layout):
    g, _ = generate(SynthConfig(n_nodes=120, n_steps=60, events=(), seed=9))
    m = hio.write_dataset(g, tmp_path, {0: "zero", 5: "five & co"}, layout)
    ds = hio.load_dataset(hio.DatasetManifest.load(tmp_path / "manifest.json"))
    assert ds.graph.same_as(g)
    assert ds.labels == {0: "zero", 5: "five & co"}
    assert m.n_nodes == 120


def test_round_trip_keeps_timestamps_and_fractions(tmp_path):
    ts = np.arange(np.datetime64("2001-01-01"), np.datetime64("2001-01-04")).astype("datetime64[s]")
    from hebbian_anomaly.core import TemporalGraph

    g = TemporalGraph(2, [(0, 1)], [[0.1, 2.5, 1e-7], [3.0, 0, 1 / 3]], ts)
    hio.write_dataset(g, tmp_path)
    back = hio.load_dataset(hio.DatasetManifest.load(tmp_path / "manifest.json")).graph
    assert back.same_as(g)


def test_loading_is_order_independent(tmp_path):
    rng = np.random.default_rng(0)
    edges = [f"{a}\t{b}" for a, b in rng.integers(0, 30, size=(60, 2)).tolist()]
    recs = [f"{i},{t},{v}" for i, t, v in zip(rng.integers(0, 30, 80), rng.integers(0, 20, 80), rng.integers(1, 9, 80))]
    # keep (node, t) unique so order cannot matter through accumulation either
    recs = list({r.rsplit(",", 1)[0]: r for r in recs}.values())
    a = hio.load_dataset(manifest(tmp_path, "\n".join(edges), "\n".join(recs), "long", n_steps=20, n_nodes=30))
    perm_e = [edges[i] for i in rng.permutation(len(edges))]
    perm_r = [recs[i] for i in rng.permutation(len(recs))]
    b = hio.load_dataset(manifest(tmp_path, "\n".join(perm_e), "\n".join(perm_r), "long", n_steps=20, n_nodes=30))
    assert a.graph.same_as(b.graph)


def test_export_empty_network(tmp_path):
    hio.export_weighted_edges(make_network(3, {}), tmp_path / "w.tsv")
    lines = (tmp_path / "w.tsv").read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("#")


def test_export_one_edge(tmp_path):
    hio.export_weighted_edges(make_network(3, {(2, 0): 1.0}), tmp_path / "w.tsv")
    data = [l for l in (tmp_path / "w.tsv").read_text().splitlines() if not l.startswith("#")]
    assert data == ["0\t2\t1"]


def test_export_import_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    weights = {(i, j): float(rng.exponential() * 10.0 ** rng.integers(-3, 4))
               for i in range(30) for j in range(i + 1, 30) if rng.random() < 0.2}
    w = make_network(30, weights, Window(5, 17, partial=True))
    hio.export_weighted_edges(w, tmp_path / "w.tsv")
    back = hio.read_weighted_edges(tmp_path / "w.tsv")
    assert back.window == w.window and back.window.partial and back.n_nodes == 30
    assert back.edges.tolist() == w.edges.tolist()
    np.testing.assert_allclose(back.weights, w.weights, rtol=1e-5, atol=0)
    lines = [l for l in (tmp_path / "w.tsv").read_text().splitlines() if not l.startswith("#")]
    assert lines == sorted(lines, key=lambda l: tuple(int(x) for x in l.split("\t")[:2]))


def gexf_parts(path):
    root = ET.parse(path).getroot()
    assert root.tag == f"{GEXF}gexf"
    graph = root.find(f"{GEXF}graph")
    assert graph.get("defaultedgetype") == "undirected"
    attrs = {a.get("title"): a.get("id") for a in graph.find(f"{GEXF}attributes")}
    nodes = graph.find(f"{GEXF}nodes").findall(f"{GEXF}node")
    edges_el = graph.find(f"{GEXF}edges")
    edges = [] if edges_el is None else edges_el.findall(f"{GEXF}edge")
    return attrs, nodes, edges


def test_gexf_singleton(tmp_path):
    hio.export_gexf(make_network(1, {}), None, {}, tmp_path / "g.gexf")
    _, nodes, edges = gexf_parts(tmp_path / "g.gexf")
    assert len(nodes) == 1 and edges == []


def test_gexf_escapes_labels(tmp_path):
    hio.export_gexf(make_network(1, {}), None, {0: "R&D <team>"}, tmp_path / "g.gexf")
    raw = (tmp_path / "g.gexf").read_text()
    assert "R&amp;D &lt;team&gt;" in raw
    _, nodes, _ = gexf_parts(tmp_path / "g.gexf")
    assert nodes[0].get("label") == "R&D <team>"


def test_gexf_triangle_with_communities(tmp_path):
    w = make_network(3, {(0, 1): 3.0, (1, 2): 0.5, (0, 2): 1.0})

    class P:
        assignment = np.array([0, 0, 1])

    hio.export_gexf(w, P, {10: "a"}, tmp_path / "g.gexf", id_map=np.array([10, 11, 12]))
    attrs, nodes, edges = gexf_parts(tmp_path / "g.gexf")
    assert len(nodes) == 3 and len(edges) == 3
    comm_id = attrs["community"]
    vals = [[v.get("value") for v in n.iter(f"{GEXF}attvalue") if v.get("for") == comm_id] for n in nodes]
    assert vals == [["0"], ["0"], ["1"]]
    assert nodes[0].get("label") == "a" and nodes[1].get("label") == "11"
    g = nx.read_gexf(tmp_path / "g.gexf")
    assert sorted(d["weight"] for *_, d in g.edges(data=True)) == [0.5, 1.0, 3.0]


def test_report_empty(tmp_path):
    hio.export_report([], tmp_path / "r.json")
    assert hio.read_report(tmp_path / "r.json") == {"records": []}


def test_report_one_cluster(tmp_path):
    w = Window(10, 14, partial=True)
    rep = ClusterReport(3, 1, "community", w, [5, 9], ["e", "f"], 0.42, 12,
                        np.array([0.0, 50.0, 100.0, 25.0]), np.array([0.0, 2.0, 4.0, 1.0]))
    hio.export_report([rep], tmp_path / "r.json")
    (rec,) = hio.read_report(tmp_path / "r.json")["records"]
    assert list(rec) == list(hio.REPORT_FIELDS)
    assert rec == {
        "window_id": 3, "window_start": 10, "window_end": 14, "partial": True, "cluster_id": 1,
        "kind": "community", "size": 2, "modularity": 0.42, "peak_time": 12, "nodes": [5, 9],
        "labels": ["e", "f"], "activity": [0.0, 50.0, 100.0, 25.0], "raw_activity": [0.0, 2.0, 4.0, 1.0],
    }
    assert len(rec["activity"]) == len(w)


def test_ground_truth_round_trip(tmp_path):
    _, truth = generate(SynthConfig(n_nodes=100, n_steps=50, seed=0, events=(EventSpec(5, 10, 20),)))
    hio.write_ground_truth(truth, tmp_path / "gt.tsv")
    line = (tmp_path / "gt.tsv").read_text().strip()
    assert line.split("\t")[:3] == ["0", "10", "20"]
    back = hio.read_ground_truth(tmp_path / "gt.tsv")
    assert back.events[0].nodes == truth.events[0].nodes


# -- email ingestion ------------------------------------------------------

D = datetime(2000, 3, 1, 12, tzinfo=timezone.utc)


def test_ingest_one_email_to_two():
    recs = [("a@x", ["b@x", "c@x"], D)] * 3 + [("b@x", ["a@x"], D)] * 3 + [("c@x", ["d@x"], D)] * 3
    ing = hio.ingest_email_log(recs, date(2000, 1, 1), date(2000, 12, 31))
    assert ing.addresses == ["a@x", "b@x", "c@x"]
    assert ing.graph.edges.tolist() == [[0, 1], [0, 2]]
    day = (D.date() - date(2000, 1, 1)).days
    assert ing.graph.series[0, day] == 3 and ing.graph.series[0].sum() == 3
    assert ing.graph.n_steps == 366


def test_ingest_drops_low_senders():
    recs = [("a@x", ["b@x"], D)] * 3 + [("b@x", ["a@x"], D)] * 2
    ing = hio.ingest_email_log(recs, date(2000, 1, 1), date(2000, 12, 31), min_sent=3)
    assert ing.addresses == ["a@x"]
    assert ing.graph.n_edges == 0
    assert ing.counters["dropped_low_senders"] == 1


def test_ingest_range_utc_and_malformed():
    late = datetime(2001, 1, 1, 0, 30, tzinfo=timezone.utc)
    from datetime import timedelta

    tz = timezone(timedelta(hours=-8))
    local_eve = datetime(2000, 12, 31, 17, 0, tzinfo=tz)  # 01:00 UTC on 1 Jan 2001
    recs = [("a@x", ["b@x"], D)] * 3 + [("a@x", ["b@x"], late), ("a@x", ["b@x"], local_eve), None, ("", [], D)]
    ing = hio.ingest_email_log(recs, date(2000, 1, 1), date(2000, 12, 31), min_sent=1)
    assert ing.counters["out_of_range"] == 2
    assert ing.counters["malformed"] == 2
    assert ing.graph.series.sum() == 3


def test_ingest_is_order_independent():
    rng = np.random.default_rng(0)
    people = [f"p{i}@e.com" for i in range(12)]
    recs = [(people[rng.integers(12)], [people[rng.integers(12)] for _ in range(rng.integers(1, 4))],
             datetime(2000, 1, 1, tzinfo=timezone.utc).replace(day=int(rng.integers(1, 29)))) for _ in range(200)]
    a = hio.ingest_email_log(recs, date(2000, 1, 1), date(2000, 1, 31))
    b = hio.ingest_email_log([recs[i] for i in rng.permutation(200)], date(2000, 1, 1), date(2000, 1, 31))
    assert a.graph.same_as(b.graph) and a.addresses == b.addresses


MSG = """Message-ID: <1.JavaMail@x>
Date: Mon, 14 May 2001 16:39:00 -0700 (PDT)
From: phillip.allen@enron.com
To: tim.belden@enron.com, John.Doe@enron.com
Cc: jane@enron.com
Subject: Re: forecast

Here is our forecast
"""


def test_parse_email_message():
    sender, recipients, when, subject = hio.parse_email_message(MSG)
    assert sender == "phillip.allen@enron.com"
    assert recipients == ["jane@enron.com", "john.doe@enron.com", "tim.belden@enron.com"]
    assert when.astimezone(timezone.utc) == datetime(2001, 5, 14, 23, 39, tzinfo=timezone.utc)
    assert subject == "Re: forecast"
    assert hio.parse_email_message("Subject: nothing\n\nbody") is None


def test_csv_and_maildir_readers_dedupe(tmp_path):
    with open(tmp_path / "emails.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["file", "message"])
        w.writerow(["allen-p/sent/1.", MSG])
        w.writerow(["allen-p/all_documents/1.", MSG])
        w.writerow(["bad/1.", "garbage without headers"])
    recs = list(hio.iter_enron_csv(tmp_path / "emails.csv"))
    assert len([r for r in recs if r]) == 1 and recs.count(None) == 1
    for i, folder in enumerate(["sent", "all_documents"]):
        (tmp_path / "maildir" / folder).mkdir(parents=True)
        (tmp_path / "maildir" / folder / f"{i}.").write_text(MSG)
    recs = list(hio.iter_maildir(tmp_path / "maildir"))
    assert len(recs) == 1 and recs[0][0] == "phillip.allen@enron.com"


def test_email_ingest_write_round_trip(tmp_path):
    recs = [("a@x", ["b@x"], D)] * 3 + [("b@x", ["a@x"], D)] * 4
    ing = hio.ingest_email_log(recs, date(2000, 1, 1), date(2000, 3, 31))
    ing.write(tmp_path)
    ds = hio.load_dataset(hio.DatasetManifest.load(tmp_path / "manifest.json"))
    assert ds.graph.same_as(ing.graph)
    assert ds.labels == {0: "a@x", 1: "b@x"}
    assert json.loads((tmp_path / "manifest.json").read_text())["step_seconds"] == 86400
