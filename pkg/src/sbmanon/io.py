"""Edge lists, label files and permutation files."""
from __future__ import annotations

import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import CommunityLabeling, Graph

log = logging.getLogger(__name__)

__all__ = [
    "ingest_edge_list",
    "write_edge_list",
    "read_labels",
    "write_labels",
    "read_pairs",
    "write_pairs",
    "atomic_open",
]


@contextmanager
def atomic_open(path, mode="w", newline="\n"):
    """Write to a temp file next to ``path`` and rename on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, encoding="utf-8", newline=newline) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            yield lineno, s.split()


def _order_ids(tokens):
    """Integer ids in numeric order, anything else in order of appearance."""
    uniq = list(dict.fromkeys(tokens))
    try:
        if all(str(int(x)) == x for x in uniq):
            return sorted(uniq, key=int)
    except ValueError:
        pass
    return uniq


def ingest_edge_list(path):
    """Parse a SNAP-style edge list.

    Returns ``(graph, ids, stats)`` where ``ids[i]`` is the original token of
    vertex ``i``.  Self-loops and repeated edges are dropped and counted.
    """
    path = Path(path)
    src, dst = [], []
    tokens_seen = []
    for lineno, parts in _data_lines(path):
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, found {len(parts)}", path, lineno)
        src.append(parts[0])
        dst.append(parts[1])
        tokens_seen.append(parts[0])
        tokens_seen.append(parts[1])
    if not src:
        raise ParseError("no edges found", path)
    ids = _order_ids(tokens_seen)
    index = {tok: i for i, tok in enumerate(ids)}
    u = np.fromiter((index[x] for x in src), dtype=np.int64, count=len(src))
    v = np.fromiter((index[x] for x in dst), dtype=np.int64, count=len(dst))
    loops = u == v
    n = len(ids)
    lo, hi = np.minimum(u[~loops], v[~loops]), np.maximum(u[~loops], v[~loops])
    keys = lo * n + hi
    g = Graph.from_keys(n, keys)
    stats = {
        "lines": len(src),
        "self_loops": int(loops.sum()),
        "duplicates": int(len(keys) - g.m),
    }
    if stats["self_loops"] or stats["duplicates"]:
        log.warning("%s: dropped %d self-loops and %d duplicate edges",
                    path, stats["self_loops"], stats["duplicates"])
    return g, ids, stats


def write_edge_list(G: Graph, path, ids=None, header=None):
    with atomic_open(path) as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# vertices {G.n} edges {G.m}\n")
        for u, v in G.edges:
            if ids is None:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{ids[u]} {ids[v]}\n")


def read_pairs(path):
    """Two-column integer file -> ``(k, 2)`` array."""
    rows = []
    for lineno, parts in _data_lines(path):
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, found {len(parts)}", path, lineno)
        try:
            rows.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError("fields must be integers", path, lineno) from None
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)


def write_pairs(pairs, path, header=None):
    with atomic_open(path) as fh:
        if header:
            fh.write(f"# {header}\n")
        for a, b in np.asarray(pairs).reshape(-1, 2):
            fh.write(f"{a} {b}\n")


def read_labels(path, n=None, ids=None) -> CommunityLabeling:
    """``vertex label`` lines.  With ``ids`` the vertex column holds original tokens."""
    pairs = []
    index = {tok: i for i, tok in enumerate(ids)} if ids is not None else None
    for lineno, parts in _data_lines(path):
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, found {len(parts)}", path, lineno)
        try:
            v = index[parts[0]] if index is not None else int(parts[0])
            lab = int(parts[1])
        except (KeyError, ValueError):
            raise ParseError(f"bad vertex or label {parts!r}", path, lineno) from None
        pairs.append((v, lab))
    if not pairs:
        raise ParseError("no labels found", path)
    arr = np.asarray(pairs, dtype=np.int64)
    size = n if n is not None else int(arr[:, 0].max()) + 1
    labels = np.full(size, -1, dtype=np.int64)
    labels[arr[:, 0]] = arr[:, 1]
    if np.any(labels < 0):
        raise ParseError("some vertices have no label", path)
    if len(np.unique(labels)) == labels.max() + 1:
        return CommunityLabeling(labels)
    return CommunityLabeling.from_partition(labels)


def write_labels(L: CommunityLabeling, path):
    write_pairs(np.stack([np.arange(L.n), L.labels], axis=1), path)
