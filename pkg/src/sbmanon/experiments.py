"""Experiment configuration and drivers that emit :class:`RunRecord` objects.

Every random draw is derived from the master seed through
``SeedSequence(seed, spawn_key=...)`` with a fixed key per role and loop
index, so each trial is independent of how many other trials run and a
record replays exactly from its embedded parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone

import numpy as np

from ._accel import backend
from .attacks import (
    PgmParams,
    automorphism_confusion,
    evaluate_attack,
    map_constants,
    map_log_score,
    pgm_attack,
    random_seed_pairs,
)
from .community import detect_communities, match_communities
from .errors import ConfigError
from .graph import identity, intersect
from .io import ingest_edge_list
from .records import RunRecord
from .synth import (
    SampleParams,
    SbmParams,
    anonymize,
    rewire_edges,
    sample_correlated_pair,
    subsample_edges,
)
from .theory import RegionQuery, certify_anonymity, offset_delta, safe_region_query

KINDS = ("sbm-pgm", "region-sweep", "real-network", "certify")

# spawn-key roles
_PAIR, _SEEDS, _DETECT, _SUB, _REWIRE, _ANON = range(6)


def derive_seed(master, *key):
    """Deterministic 63-bit child seed of ``master`` for a spawn key."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def default_lambda_grid(n):
    grid = np.unique(np.round(np.geomspace(10, 2000, 12)).astype(int))
    return [int(x) for x in grid if x <= n]


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    # SBM model
    n: int = 5000
    C: int = 2
    a: float = 20.0
    b: float = 5.0
    # sampling: unset values are solved from delta (sbm-pgm) or default to 1
    s1: float | None = None
    s2: float | None = None
    t: float | None = None
    equal_s: float = 0.5
    deltas: list = field(default_factory=lambda: [-0.4, -0.05, 0.05, 0.75])
    # attacks
    r_values: list | None = None
    lambda_grid: list | None = None
    trials: int = 5
    community_constrained: bool = True
    # region sweep
    t_values: list | None = None
    grid_steps: int = 101
    a_max: float = 100.0
    b_max: float = 100.0
    # real network
    input: str | None = None
    eps_list: list = field(default_factory=lambda: [0.1, 0.15])
    rewire_fraction: float = 0.3
    pgm_seeds: int = 500
    min_size: int = 4
    # certify
    witness_limit: int = 50
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        if self.t_values is None:
            self.t_values = [1.0, 0.2] if self.kind == "region-sweep" else [1.0, 0.9, 0.8, 0.7, 0.6, 0.5]
        if self.r_values is None:
            self.r_values = [2, 3, 4] if self.kind == "real-network" else [4]
        if self.lambda_grid is None:
            self.lambda_grid = default_lambda_grid(self.n)
        for name in ("deltas", "r_values", "lambda_grid", "t_values", "eps_list"):
            v = getattr(self, name)
            if not isinstance(v, list) or not v:
                raise ConfigError(f"{name} must be a nonempty list")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.kind == "real-network" and not self.input:
            raise ConfigError("real-network experiments need an input edge list")
        if self.kind == "region-sweep" and self.grid_steps < 2:
            raise ConfigError("grid_steps must be at least 2")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in d:
            raise ConfigError("config needs a 'kind'")
        return cls(**d)

    @classmethod
    def load(cls, path, **overrides):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def to_dict(self):
        return json.loads(json.dumps(asdict(self)))

    def scaled(self, scale):
        """``ci`` shrinks synthetic runs to n = 1000 and 5 trials."""
        if scale in (None, "full"):
            return self
        if scale != "ci":
            raise ConfigError(f"unknown scale {scale!r}")
        d = self.to_dict()
        if self.kind in ("sbm-pgm", "certify"):
            d["n"] = 1000
            d["lambda_grid"] = [x for x in self.lambda_grid if x <= 1000] or [10]
        d["trials"] = min(self.trials, 5)
        return ExperimentConfig.from_dict(d)


def resolve_sampling(delta, a, b, s1=None, s2=None, t=None, equal_s=0.5):
    """Sampling triple with ``(a + b) s1 s2 t / 2 - 1 == delta``.

    Pinned values are kept; otherwise ``s1 = s2 = equal_s`` and ``t`` absorbs
    the rest.
    """
    product = 2.0 * (delta + 1.0) / (a + b)
    if not 0 < product <= 1:
        raise ConfigError(f"delta={delta} needs s1*s2*t={product:.6g}, outside (0, 1]")
    pinned = [x is not None for x in (s1, s2, t)]
    if all(pinned):
        if not math.isclose(s1 * s2 * t, product, rel_tol=1e-12):
            raise ConfigError(f"pinned s1, s2, t give delta={offset_delta(a, b, s1, s2, t)}, not {delta}")
    elif t is None:
        s1 = equal_s if s1 is None else s1
        s2 = equal_s if s2 is None else s2
        t = product / (s1 * s2)
    elif s2 is None:
        s1 = equal_s if s1 is None else s1
        s2 = product / (s1 * t)
    else:
        s1 = product / (s2 * t)
    for name, v in (("s1", s1), ("s2", s2), ("t", t)):
        if not 0 < v <= 1:
            raise ConfigError(f"delta={delta} resolves to {name}={v:.6g}, outside (0, 1]")
    return float(s1), float(s2), float(t)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _record(config, tables, summary, started):
    return RunRecord(experiment=config.kind, params=config.to_dict(), seed=int(config.seed),
                     tables=tables, summary=summary, started=started, finished=_now(),
                     backend=backend())


def run_sbm_experiment(config: ExperimentConfig) -> RunRecord:
    """Seeded PGM on correlated SBM pairs over (delta, r, seed count, trial)."""
    if config.kind != "sbm-pgm":
        raise ConfigError("run_sbm_experiment needs kind 'sbm-pgm'")
    started = _now()
    sbm = SbmParams(n=config.n, C=config.C, a=config.a, b=config.b)
    rows = []
    resolved = []
    for di, delta in enumerate(config.deltas):
        s1, s2, t = resolve_sampling(delta, config.a, config.b, config.s1, config.s2, config.t,
                                     config.equal_s)
        resolved.append({"delta": float(delta), "s1": s1, "s2": s2, "t": t,
                         "offset": offset_delta(config.a, config.b, s1, s2, t)})
        sample = SampleParams(s1, s2, t)
        for trial in range(config.trials):
            pair = sample_correlated_pair(sbm, sample, derive_seed(config.seed, _PAIR, di, trial))
            L1, L2 = pair.labeling, pair.anonymized_labeling
            for lam in config.lambda_grid:
                lam = int(lam)
                if lam > config.n:
                    continue
                seeds = random_seed_pairs(pair.pi, lam, derive_seed(config.seed, _SEEDS, di, trial, lam))
                for r in config.r_values:
                    res = pgm_attack(pair.g1, pair.anonymized, seeds,
                                     PgmParams(int(r), lam, config.community_constrained), L1, L2)
                    m = evaluate_attack(res, pair.pi)
                    rows.append({"delta": float(delta), "r": int(r), "lambda0": lam, "trial": trial,
                                 "mapped": m.mapped_count, "error_rate": m.error_rate,
                                 "wrong": m.wrong})
    summary_rows = _median_table(rows, ("delta", "r", "lambda0"), ("mapped", "error_rate"))
    return _record(config, {"trials": rows, "summary": summary_rows, "sampling": resolved},
                   {"n": config.n, "cells": len(summary_rows)}, started)


def _median_table(rows, keys, values):
    groups = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = []
    for key, grp in groups.items():
        d = dict(zip(keys, key))
        for v in values:
            d[f"median_{v}"] = float(np.median([g[v] for g in grp]))
        d["trials"] = len(grp)
        out.append(d)
    return out


def run_region_sweep(config: ExperimentConfig) -> RunRecord:
    """Safe-region verdicts on the ``b <= a`` half of an (a, b) grid, per t."""
    if config.kind != "region-sweep":
        raise ConfigError("run_region_sweep needs kind 'region-sweep'")
    started = _now()
    s1 = 1.0 if config.s1 is None else config.s1
    s2 = 1.0 if config.s2 is None else config.s2
    a_vals = np.linspace(0.0, config.a_max, config.grid_steps)
    b_vals = np.linspace(0.0, config.b_max, config.grid_steps)
    rows = []
    safe_counts = {}
    for t in config.t_values:
        count = 0
        for a in a_vals:
            for b in b_vals:
                if b > a:
                    continue
                v = safe_region_query(RegionQuery(float(a), float(b), config.C, s1, s2, float(t)))
                count += v.safe
                rows.append({"t": float(t), "a": float(a), "b": float(b),
                             "cd_possible": v.cd_possible, "da_impossible": v.da_impossible,
                             "ach_possible": v.ach_possible, "safe": v.safe,
                             "cd_margin": v.cd_margin, "converse_margin": v.converse_margin,
                             "achievability_margin": v.achievability_margin})
        safe_counts[repr(float(t))] = count
    return _record(config, {"grid": rows}, {"safe_cells": safe_counts, "s1": s1, "s2": s2}, started)


def run_real_experiment(config: ExperimentConfig) -> RunRecord:
    """Community preservation under subsampling and PGM against a rewired
    auxiliary graph, on an input edge list."""
    if config.kind != "real-network":
        raise ConfigError("run_real_experiment needs kind 'real-network'")
    started = _now()
    G, _, stats = ingest_edge_list(config.input)
    comm_rows, jac_rows, pgm_rows = [], [], []
    for trial in range(config.trials):
        base = detect_communities(G, derive_seed(config.seed, _DETECT, trial, 0), config.min_size)
        aux = rewire_edges(G, config.rewire_fraction, derive_seed(config.seed, _REWIRE, trial))
        for ti, t in enumerate(config.t_values):
            t = float(t)
            if t == 1.0:
                released, part = G, base
            else:
                released = subsample_edges(G, t, derive_seed(config.seed, _SUB, trial, ti))
                part = detect_communities(released, derive_seed(config.seed, _DETECT, trial, ti + 1),
                                          config.min_size)
            cmp = match_communities(base, part, eps=config.eps_list)
            row = {"trial": trial, "t": t, "communities": cmp.other_stats["count"],
                   "min_size": cmp.other_stats["min"], "max_size": cmp.other_stats["max"],
                   "base_communities": cmp.base_stats["count"], "modularity": part.modularity}
            for e in config.eps_list:
                row[f"preservation_{1 - e:.2f}"] = cmp.preservation[float(e)]
            comm_rows.append(row)
            for rank, j in enumerate(cmp.top_jaccard(5).tolist(), 1):
                jac_rows.append({"trial": trial, "t": t, "rank": rank, "jaccard": j})

            pi, anon = anonymize(released, derive_seed(config.seed, _ANON, trial, ti))
            seeds = random_seed_pairs(pi, min(config.pgm_seeds, G.n),
                                      derive_seed(config.seed, _SEEDS, trial, ti))
            for r in config.r_values:
                res = pgm_attack(aux, anon, seeds, PgmParams(int(r), len(seeds), False))
                m = evaluate_attack(res, pi)
                pgm_rows.append({"trial": trial, "t": t, "r": int(r), "mapped": m.mapped_count,
                                 "error_rate": m.error_rate})
    summary = {"vertices": G.n, "edges": G.m, "ingest": stats}
    return _record(config, {
        "communities": comm_rows,
        "jaccard": jac_rows,
        "pgm": pgm_rows,
        "pgm_summary": _median_table(pgm_rows, ("t", "r"), ("mapped", "error_rate")),
    }, summary, started)


def run_certify_experiment(config: ExperimentConfig) -> RunRecord:
    """Isolated-vertex certificates and MAP tie witnesses on correlated pairs."""
    if config.kind != "certify":
        raise ConfigError("run_certify_experiment needs kind 'certify'")
    started = _now()
    sbm = SbmParams(n=config.n, C=config.C, a=config.a, b=config.b)
    sample = SampleParams(1.0 if config.s1 is None else config.s1,
                          1.0 if config.s2 is None else config.s2,
                          1.0 if config.t is None else config.t)
    const = map_constants(sbm.p, sbm.q, sample.s1, sample.s2 * sample.t)
    rows = []
    for trial in range(config.trials):
        pair = sample_correlated_pair(sbm, sample, derive_seed(config.seed, _PAIR, 0, trial))
        cert = certify_anonymity(pair.g1, pair.g2, pair.labeling)
        conf = automorphism_confusion(intersect(pair.g1, pair.g2), pair.labeling,
                                      max_witnesses=config.witness_limit)
        # the un-anonymized release stands in for pi(G2) so identity is the truth
        L = pair.labeling
        base = map_log_score(pair.g1, pair.g2, L, L, identity(config.n), const)
        ties = sum(map_log_score(pair.g1, pair.g2, L, L, w, const) <= base for w in conf.witnesses)
        rows.append({"trial": trial, "isolated": list(cert.counts), "total_isolated": cert.total_isolated,
                     "max_bits": cert.max_bits, "log2_automorphisms": cert.log2_automorphism_bound,
                     "witnesses": len(conf.witnesses), "witnesses_at_least_identity": int(ties)})
    rate = (config.a + (config.C - 1) * config.b) * sample.s1 * sample.s2 * sample.t / config.C
    return _record(config, {"trials": rows},
                   {"normalized_rate": rate, "s1": sample.s1, "s2": sample.s2, "t": sample.t}, started)


RUNNERS = {
    "sbm-pgm": run_sbm_experiment,
    "region-sweep": run_region_sweep,
    "real-network": run_real_experiment,
    "certify": run_certify_experiment,
}


def run_experiment(config: ExperimentConfig) -> RunRecord:
    return RUNNERS[config.kind](config)


def replay(record: RunRecord) -> RunRecord:
    """Re-run an experiment from the parameters embedded in ``record``."""
    config = ExperimentConfig.from_dict(record.params)
    if int(config.seed) != int(record.seed):
        raise ConfigError("record seed does not match its parameters")
    return run_experiment(config)
