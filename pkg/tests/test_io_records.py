import numpy as np
import pytest

from sbmanon.errors import FormatVersionError, ParseError
from sbmanon.graph import CommunityLabeling, Graph
from sbmanon.io import (
    ingest_edge_list,
    read_labels,
    read_pairs,
    write_edge_list,
    write_labels,
    write_pairs,
)
from sbmanon.records import RunRecord, read_run_record, write_csv, write_run_record


def test_ingest_basic(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n1 2")
    g, ids, stats = ingest_edge_list(p)
    assert (g.n, g.m) == (3, 2)
    assert ids == ["0", "1", "2"]
    assert stats["self_loops"] == 0


def test_ingest_comments_loops_duplicates(tmp_path, caplog):
    p = tmp_path / "g.txt"
    p.write_text("# header\n10 2\n2 10\n\n3 3\n2 7\n")
    g, ids, stats = ingest_edge_list(p)
    assert ids == ["2", "3", "7", "10"]
    assert g.edge_set() == {(0, 3), (0, 2)}
    assert stats == {"lines": 4, "self_loops": 1, "duplicates": 1}
    assert "dropped" in caplog.text


def test_ingest_string_ids(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("alice bob\nbob carol\n")
    g, ids, _ = ingest_edge_list(p)
    assert ids == ["alice", "bob", "carol"] and g.m == 2


@pytest.mark.parametrize("text,line", [("0 1\n1 2 3\n", 2), ("0\n", 1)])
def test_ingest_malformed(tmp_path, text, line):
    p = tmp_path / "g.txt"
    p.write_text(text)
    with pytest.raises(ParseError) as exc:
        ingest_edge_list(p)
    assert exc.value.lineno == line
    assert f":{line}" in str(exc.value)


def test_ingest_empty(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# nothing\n")
    with pytest.raises(ParseError):
        ingest_edge_list(p)


def test_export_round_trip(tmp_path, rng):
    from conftest import random_graph
    g = random_graph(rng, 50, 0.1)
    src = tmp_path / "in.txt"
    write_edge_list(g, src, ids=[str(100 + i) for i in range(50)], header="test")
    g2, ids, _ = ingest_edge_list(src)
    out = tmp_path / "out.txt"
    write_edge_list(g2, out, ids=ids)
    g3, ids3, _ = ingest_edge_list(out)
    assert g3 == g2 and ids3 == ids
    # the canonical edge set survives when every vertex has an edge
    keep = np.flatnonzero(g.degrees > 0)
    assert g2.m == g.m and len(ids) == len(keep)


def test_pairs_and_labels(tmp_path):
    write_pairs([[0, 2], [1, 0], [2, 1]], tmp_path / "p.txt", header="perm")
    assert read_pairs(tmp_path / "p.txt").tolist() == [[0, 2], [1, 0], [2, 1]]
    L = CommunityLabeling([1, 0, 1, 2])
    write_labels(L, tmp_path / "l.txt")
    assert read_labels(tmp_path / "l.txt") == L
    (tmp_path / "bad.txt").write_text("0 x\n")
    with pytest.raises(ParseError):
        read_labels(tmp_path / "bad.txt")
    (tmp_path / "gap.txt").write_text("0 0\n2 1\n")
    with pytest.raises(ParseError):
        read_labels(tmp_path / "gap.txt")


def sample_record():
    return RunRecord(
        experiment="sbm-pgm", params={"n": 10, "deltas": [0.1, -0.4]}, seed=7,
        tables={"trials": [{"a": 1, "b": 0.1 + 0.2, "c": "x,y", "d": True, "e": None}],
                "empty": []},
        summary={"cells": 1, "nested": {"k": [1, 2]}}, started="s", finished="f", backend="numba")


def test_record_round_trip(tmp_path):
    rec = sample_record()
    write_run_record(rec, tmp_path / "r.rec")
    assert read_run_record(tmp_path / "r.rec") == rec


def test_record_version_mismatch(tmp_path):
    p = tmp_path / "r.rec"
    write_run_record(sample_record(), p)
    p.write_text(p.read_text().replace("format_version = 1", "format_version = 99"))
    with pytest.raises(FormatVersionError):
        read_run_record(p)
    p.write_text("hello\n")
    with pytest.raises(ParseError):
        read_run_record(p)


def test_csv(tmp_path):
    write_csv([{"a": 1, "b": 0.5}, {"a": 2, "b": True}], tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_bytes() == b"a,b\n1,0.5\n2,true\n"
