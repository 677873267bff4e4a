"""Compare the numba kernels with their pure-numpy/python fallbacks.

    python benchmarks/bench_kernels.py [--n 5000] [--repeat 3]

Both backends run on identical inputs and their outputs are checked for
equality before timings are reported.
"""
import argparse
import time

import numpy as np

from sbmanon import _kernels
from sbmanon._accel import USE_JIT
from sbmanon.attacks import random_seed_pairs
from sbmanon.experiments import resolve_sampling
from sbmanon.synth import SampleParams, SbmParams, sample_correlated_pair


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def pgm_case(n, seeds, seed):
    sbm = SbmParams(n=n, C=2, a=20.0, b=5.0)
    pair = sample_correlated_pair(sbm, SampleParams(*resolve_sampling(0.75, 20.0, 5.0)), seed)
    sp = random_seed_pairs(pair.pi, seeds, seed + 1)
    ip1, ix1 = pair.g1.csr
    ip2, ix2 = pair.anonymized.csr
    lab1, lab2 = pair.labeling.labels, pair.anonymized_labeling.labels

    def run(kernel):
        def go():
            m12 = np.full(n, -1, dtype=np.int64)
            m21 = np.full(n, -1, dtype=np.int64)
            m12[sp[:, 0]] = sp[:, 1]
            m21[sp[:, 1]] = sp[:, 0]
            kernel(ip1, ix1, ip2, ix2, lab1, lab2, True, sp[:, 0].copy(), 4, m12, m21)
            return m12
        return go
    return run


def louvain_case(n, seed):
    sbm = SbmParams(n=n, C=2, a=20.0, b=1.0)
    g = sample_correlated_pair(sbm, SampleParams(), seed).ground
    ip, ix = g.csr
    w = np.ones(len(ix))
    deg = np.diff(ip).astype(np.float64)
    order = np.random.default_rng(seed).permutation(n).astype(np.int64)

    def run(kernel):
        def go():
            comm = np.arange(n, dtype=np.int64)
            kernel(ip, ix, w, deg, order, comm, 2.0 * g.m, 1000)
            return comm
        return go
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seeds", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    if not USE_JIT:
        raise SystemExit("numba is disabled (SBMANON_DISABLE_JIT); nothing to compare")

    cases = [
        ("pgm percolation", pgm_case(args.n, args.seeds, args.seed),
         _kernels._pgm_jit, _kernels._pgm_numpy),
        ("louvain local moving", louvain_case(min(args.n, 2000), args.seed),
         _kernels._louvain_move_jit, _kernels._louvain_move_py),
    ]
    print(f"{'kernel':<22}{'numba s':>10}{'fallback s':>12}{'speedup':>10}  equal")
    for name, case, fast, slow in cases:
        case(fast)()  # compile outside the timing
        tf, of = best_of(case(fast), args.repeat)
        ts, os_ = best_of(case(slow), max(1, args.repeat // 3))
        print(f"{name:<22}{tf:>10.4f}{ts:>12.4f}{ts / tf:>9.1f}x  {np.array_equal(of, os_)}")


if __name__ == "__main__":
    main()
