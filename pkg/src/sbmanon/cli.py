"""Command line interface.

Exit codes: 0 success, 1 configuration/parameter error, 2 I/O or parse
error, 3 capacity guard exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .attacks import (
    PgmParams,
    evaluate_attack,
    map_attack,
    map_constants,
    pgm_attack,
    random_seed_pairs,
)
from .community import detect_communities, match_communities
from .errors import SbmAnonError
from .experiments import KINDS, ExperimentConfig, run_experiment
from .graph import CommunityLabeling
from .io import ingest_edge_list, read_labels, read_pairs, write_edge_list, write_labels, write_pairs
from .records import RunRecord, write_csv, write_run_record
from .synth import SampleParams, SbmParams, anonymize, rewire_edges, sample_correlated_pair, subsample_edges
from .theory import RegionQuery, certify_anonymity, safe_region_query, subsample_window

log = logging.getLogger("sbmanon")


def _emit(args, record: RunRecord, table=None):
    """Write ``record`` (or one of its tables as CSV) to ``--out``, or stdout."""
    rows = record.tables.get(table) if table else None
    if args.format == "csv":
        if rows is None:
            rows = next(iter(record.tables.values()), [])
        if args.out:
            write_csv(rows, args.out)
        else:
            import csv
            w = csv.writer(sys.stdout, lineterminator="\n")
            cols = list(rows[0]) if rows else []
            w.writerow(cols)
            for row in rows:
                w.writerow([row[c] for c in cols])
    elif args.out:
        write_run_record(record, args.out)
    else:
        print(json.dumps(record.summary, indent=2, sort_keys=True))


def _simple_record(kind, args, tables, summary):
    params = {k: v for k, v in vars(args).items() if k not in ("func",) and _jsonable(v)}
    return RunRecord(experiment=kind, params=params, seed=int(args.seed), tables=tables, summary=summary)


def _jsonable(v):
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def cmd_generate(args):
    sbm = SbmParams(n=args.n, C=args.C, a=args.a, b=args.b) if args.p is None else \
        SbmParams(n=args.n, C=args.C, p=args.p, q=args.q)
    pair = sample_correlated_pair(sbm, SampleParams(args.s1, args.s2, args.t), args.seed)
    out = Path(args.out or "generated")
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(pair.ground, out / "ground.edges")
    write_edge_list(pair.g1, out / "g1.edges")
    write_edge_list(pair.g2, out / "g2.edges")
    write_edge_list(pair.anonymized, out / "anonymized.edges")
    write_labels(pair.labeling, out / "labels.txt")
    write_labels(pair.anonymized_labeling, out / "anonymized_labels.txt")
    write_pairs(np.stack([np.arange(sbm.n), pair.pi], axis=1), out / "pi.txt",
                header="vertex image under the anonymizing permutation")
    meta = {"seed": args.seed, "sbm": sbm.to_dict(), "sample": pair.sample.to_dict(),
            "edges": {"ground": pair.ground.m, "g1": pair.g1.m, "g2": pair.g2.m}}
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(meta["edges"]))


def cmd_sanitize(args):
    G, ids, _ = ingest_edge_list(args.input)
    steps = []
    if args.rewire:
        G = rewire_edges(G, args.rewire, args.seed)
        steps.append(f"rewire {args.rewire}")
    if args.t < 1.0:
        G = subsample_edges(G, args.t, args.seed + 1)
        steps.append(f"subsample {args.t}")
    if args.anonymize:
        pi, G = anonymize(G, args.seed + 2)
        ids = None
        if args.permutation_out:
            write_pairs(np.stack([np.arange(G.n), pi], axis=1), args.permutation_out)
        steps.append("anonymize")
    header = f"sanitized: {', '.join(steps) or 'none'}; seed {args.seed}"
    if args.out:
        write_edge_list(G, args.out, ids=ids, header=header)
    else:
        for u, v in G.edges:
            print(ids[u] if ids else u, ids[v] if ids else v)


def _load_int_graph(path):
    G, ids, _ = ingest_edge_list(path)
    return G, ids


def _load_pair_graphs(args):
    g1, ids1 = _load_int_graph(args.g1)
    g2, ids2 = _load_int_graph(args.g2)
    n = max(g1.n, g2.n, args.n or 0)
    # generated files use dense ids, so re-embed both graphs on 0..n-1
    from .graph import Graph
    g1 = Graph(n, np.asarray([[int(ids1[u]), int(ids1[v])] for u, v in g1.edges]).reshape(-1, 2))
    g2 = Graph(n, np.asarray([[int(ids2[u]), int(ids2[v])] for u, v in g2.edges]).reshape(-1, 2))
    return g1, g2


def cmd_attack(args):
    g1, g2 = _load_pair_graphs(args)
    L1 = read_labels(args.labels1, n=g1.n) if args.labels1 else None
    L2 = read_labels(args.labels2, n=g2.n) if args.labels2 else None
    truth = read_pairs(args.truth)[:, 1] if args.truth else None
    if args.algorithm == "pgm":
        if args.seeds:
            seeds = read_pairs(args.seeds)
        elif truth is not None:
            seeds = random_seed_pairs(truth, args.num_seeds, args.seed)
        else:
            raise SbmAnonError("pgm needs --seeds or --truth with --num-seeds")
        res = pgm_attack(g1, g2, seeds, PgmParams(args.r, len(seeds), args.constrained), L1, L2)
    else:
        if L1 is None or L2 is None:
            raise SbmAnonError("map needs --labels1 and --labels2")
        n = g1.n
        p, q = args.p, args.q
        if p is None:
            sbm = SbmParams(n=n, C=L1.C, a=args.a, b=args.b)
            p, q = sbm.p, sbm.q
        res = map_attack(g1, g2, L1, L2, map_constants(p, q, args.s1, args.s2))
    summary = {"algorithm": res.algorithm, "mapped": res.mapped_count, **res.params}
    if truth is not None:
        m = evaluate_attack(res, truth)
        summary.update(error_rate=m.error_rate, wrong=m.wrong)
    rows = [{"vertex": int(i), "image": int(j)} for i, j in enumerate(res.mapping) if j >= 0]
    _emit(args, _simple_record(f"attack-{args.algorithm}", args, {"mapping": rows}, summary), "mapping")


def cmd_certify(args):
    g1, g2 = _load_pair_graphs(args)
    L = read_labels(args.labels, n=g1.n)
    cert = certify_anonymity(g1, g2, L)
    summary = {"isolated": list(cert.counts), "total_isolated": cert.total_isolated,
               "max_bits": cert.max_bits, "log2_automorphism_bound": cert.log2_automorphism_bound}
    rows = [{"community": k, "isolated": c, "bits": (float(np.log2(c)) if c > 1 else 0.0)}
            for k, c in enumerate(cert.counts)]
    _emit(args, _simple_record("certify", args, {"communities": rows}, summary), "communities")


def cmd_region(args):
    if args.a is not None:
        q = RegionQuery(args.a, args.b, args.C, args.s1, args.s2, args.t, args.alpha)
        v = safe_region_query(q)
        w = subsample_window(args.a, args.b, args.C, args.s1, args.s2)
        out = {**v._asdict(), "window": w._asdict()}
        print(json.dumps(out, indent=2))
        return
    cfg = ExperimentConfig(kind="region-sweep", seed=args.seed, C=args.C, s1=args.s1, s2=args.s2,
                           t_values=args.t_values or [1.0, 0.2], grid_steps=args.steps,
                           a_max=args.max, b_max=args.max)
    _emit(args, run_experiment(cfg), "grid")


def cmd_communities(args):
    G, ids, _ = ingest_edge_list(args.input)
    base = detect_communities(G, args.seed, args.min_size)
    summary = {"vertices": G.n, "edges": G.m, "communities": base.count,
               "modularity": base.modularity}
    tables = {"labels": [{"vertex": ids[i], "community": int(c)} for i, c in enumerate(base.labeling.labels)]}
    if args.compare:
        L = read_labels(args.compare, n=G.n, ids=ids)
        from .community import DetectedPartition, modularity
        other = DetectedPartition(L, modularity(G, L), args.min_size)
        cmp = match_communities(base, other)
        tables["matches"] = [{"base": int(c), "size": int(s), "best": int(m), "jaccard": float(j)}
                             for c, s, m, j in zip(cmp.base_index, cmp.base_sizes, cmp.best_match,
                                                   cmp.best_jaccard)]
        summary["preservation"] = {repr(k): v for k, v in cmp.preservation.items()}
    _emit(args, _simple_record("communities", args, tables, summary), "labels")


def cmd_experiment(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config, kind=args.kind, seed=args.seed_override)
    else:
        cfg = ExperimentConfig(kind=args.kind, seed=args.seed, input=args.input)
    if args.input and cfg.input != args.input:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "input": args.input})
    cfg = cfg.scaled(args.scale)
    record = run_experiment(cfg)
    table = {"sbm-pgm": "summary", "region-sweep": "grid", "real-network": "pgm_summary",
             "certify": "trials"}[cfg.kind]
    _emit(args, record, table)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--out", help="output path (directory for generate)")
    common.add_argument("--format", choices=("csv", "record"), default="record")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sbmanon", parents=[common],
                                description="Correlated SBM privacy toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample a correlated SBM pair")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--C", type=int, default=2)
    g.add_argument("--a", type=float, default=20.0)
    g.add_argument("--b", type=float, default=5.0)
    g.add_argument("--p", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--s1", type=float, default=1.0)
    g.add_argument("--s2", type=float, default=1.0)
    g.add_argument("--t", type=float, default=1.0)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sanitize", parents=[common], help="rewire, subsample and/or anonymize an edge list")
    s.add_argument("input")
    s.add_argument("--t", type=float, default=1.0, help="edge retention probability")
    s.add_argument("--rewire", type=float, default=0.0, help="fraction of edges to rewire")
    s.add_argument("--anonymize", action="store_true")
    s.add_argument("--permutation-out")
    s.set_defaults(func=cmd_sanitize)

    a = sub.add_parser("attack", parents=[common], help="run a deanonymization attack")
    a.add_argument("algorithm", choices=("pgm", "map"))
    a.add_argument("--g1", required=True, help="auxiliary graph edge list")
    a.add_argument("--g2", required=True, help="anonymized graph edge list")
    a.add_argument("--n", type=int, help="vertex count if trailing vertices are isolated")
    a.add_argument("--labels1")
    a.add_argument("--labels2")
    a.add_argument("--truth", help="'vertex image' file for evaluation / seed drawing")
    a.add_argument("--seeds", help="'u v' seed pair file")
    a.add_argument("--num-seeds", type=int, default=100)
    a.add_argument("--r", type=int, default=4)
    a.add_argument("--constrained", action="store_true")
    a.add_argument("--a", type=float, default=20.0)
    a.add_argument("--b", type=float, default=5.0)
    a.add_argument("--p", type=float)
    a.add_argument("--q", type=float)
    a.add_argument("--s1", type=float, default=0.5)
    a.add_argument("--s2", type=float, default=0.5)
    a.set_defaults(func=cmd_attack)

    c = sub.add_parser("certify", parents=[common], help="isolated-vertex anonymity certificate")
    c.add_argument("--g1", required=True)
    c.add_argument("--g2", required=True)
    c.add_argument("--labels", required=True)
    c.add_argument("--n", type=int)
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("region", parents=[common], help="safe-region verdicts or grid sweep")
    r.add_argument("--a", type=float, help="single query instead of a sweep")
    r.add_argument("--b", type=float, default=0.0)
    r.add_argument("--C", type=int, default=2)
    r.add_argument("--s1", type=float, default=0.1)
    r.add_argument("--s2", type=float, default=0.5)
    r.add_argument("--t", type=float, default=1.0)
    r.add_argument("--alpha", type=float, default=0.0)
    r.add_argument("--t-values", type=float, nargs="+")
    r.add_argument("--steps", type=int, default=101)
    r.add_argument("--max", type=float, default=100.0)
    r.set_defaults(func=cmd_region)

    m = sub.add_parser("communities", parents=[common], help="Louvain detection and comparison")
    m.add_argument("input")
    m.add_argument("--compare", help="label file to compare against")
    m.add_argument("--min-size", type=int, default=4)
    m.set_defaults(func=cmd_communities)

    e = sub.add_parser("experiment", parents=[common], help="run a configured experiment")
    e.add_argument("kind", choices=KINDS)
    e.add_argument("--input", help="edge list for real-network runs")
    e.add_argument("--scale", choices=("full", "ci"), default="full")
    e.set_defaults(func=cmd_experiment, seed_override=None)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "experiment" and args.config and "--seed" in (argv or sys.argv[1:]):
        args.seed_override = args.seed
    try:
        args.func(args)
    except SbmAnonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
