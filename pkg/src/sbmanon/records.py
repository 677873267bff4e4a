"""Run records: a versioned key/value header followed by tabular sections.

Layout::

    #sbmanon-run-record
    format_version = 1
    experiment = "sbm-pgm"
    seed = 7
    params = {...}
    [table trials]
    delta,r,lambda0,...
    -0.4,4,10,...
    [end]

Scalar values and table cells are JSON literals (floats use ``repr`` so they
round-trip exactly); table rows are CSV-quoted.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import FormatVersionError, ParseError
from .io import atomic_open

FORMAT_VERSION = 1
MAGIC = "#sbmanon-run-record"
_HEADER_KEYS = ("format_version", "experiment", "seed", "started", "finished", "backend")


@dataclass
class RunRecord:
    experiment: str
    params: dict
    seed: int
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    backend: str = ""
    format_version: int = FORMAT_VERSION

    def metrics(self):
        """Everything that must replay bit-identically."""
        return {"tables": self.tables, "summary": self.summary}


def write_run_record(record: RunRecord, path):
    with atomic_open(path) as fh:
        fh.write(MAGIC + "\n")
        for key in _HEADER_KEYS:
            fh.write(f"{key} = {json.dumps(getattr(record, key))}\n")
        fh.write(f"params = {json.dumps(record.params, sort_keys=True)}\n")
        fh.write(f"summary = {json.dumps(record.summary, sort_keys=True)}\n")
        for name, rows in record.tables.items():
            fh.write(f"[table {name}]\n")
            cols = _columns(rows)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in rows:
                w.writerow([json.dumps(row.get(c)) for c in cols])
            fh.write("[end]\n")


def _columns(rows):
    cols = []
    for row in rows:
        for c in row:
            if c not in cols:
                cols.append(c)
    return cols


def read_run_record(path) -> RunRecord:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != MAGIC:
        raise ParseError("not a run record", path, 1)
    header = {}
    tables = {}
    i = 1
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line:
            continue
        if line.startswith("[table ") and line.endswith("]"):
            name = line[len("[table "):-1]
            body = []
            while i < len(lines) and lines[i] != "[end]":
                body.append(lines[i])
                i += 1
            if i == len(lines):
                raise ParseError(f"unterminated table {name!r}", path, i)
            i += 1
            reader = csv.reader(io.StringIO("\n".join(body)))
            cols = next(reader, [])
            tables[name] = [dict(zip(cols, (json.loads(c) for c in row))) for row in reader]
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ParseError(f"cannot parse {line!r}", path, i)
        try:
            header[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad value for {key}: {exc}", path, i) from None
        if key == "format_version" and header[key] != FORMAT_VERSION:
            raise FormatVersionError(
                f"{path}: record format version {header[key]} is not supported (expected {FORMAT_VERSION})")
    if "format_version" not in header:
        raise FormatVersionError(f"{path}: missing format_version")
    return RunRecord(
        experiment=header["experiment"], params=header["params"], seed=header["seed"],
        tables=tables, summary=header.get("summary", {}), started=header.get("started", ""),
        finished=header.get("finished", ""), backend=header.get("backend", ""),
        format_version=header["format_version"],
    )


def write_csv(rows, path):
    """Plain CSV with a header row (UTF-8, LF)."""
    cols = _columns(rows)
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_plain(row.get(c)) for c in cols])


def _plain(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)
